#include "sosg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sosg {

namespace {

// ---------------------------------------------------------------------------
// Dense two-phase revised simplex for  min c.p  s.t.  E p = b, p >= 0.
// The oracle runs on its own vertex solver rather than the interior-point
// engine: grid LPs have thousands of near-duplicate columns, and a basic
// solution is exact where a path-following iterate can stall. It also keeps
// the oracle's algorithmic path fully independent of the machinery it is
// used to check.
// ---------------------------------------------------------------------------

enum class LpStatus { Optimal, Infeasible, Unbounded, Stalled };

struct SimplexOut {
    LpStatus status = LpStatus::Stalled;
    double value = 0.0;
    Vec x;
    Vec y;  // row duals at the optimal basis
};

class DenseSimplex {
  public:
    DenseSimplex(Mat E, Vec b, Vec c)
        : E_(std::move(E)), b_(std::move(b)), c_(std::move(c)), m_(E_.rows), n_(E_.cols) {}

    SimplexOut run() {
        for (int i = 0; i < m_; ++i)
            if (b_[i] < 0.0) {
                b_[i] = -b_[i];
                for (int j = 0; j < n_; ++j) E_(i, j) = -E_(i, j);
            }
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;  // artificials
        xb_ = b_;

        // phase 1: minimize the artificial sum
        Vec phase1_cost(n_ + m_, 0.0);
        for (int i = 0; i < m_; ++i) phase1_cost[n_ + i] = 1.0;
        SimplexOut out;
        if (!iterate(phase1_cost, /*allow_artificials=*/true)) {
            out.status = LpStatus::Stalled;
            return out;
        }
        double art = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n_) art += xb_[i];
        if (art > 1e-7 * (1.0 + norm_inf(b_))) {
            out.status = LpStatus::Infeasible;
            return out;
        }

        // phase 2: artificials keep zero cost and may stay basic at level
        // zero, but never re-enter
        Vec cost(n_ + m_, 0.0);
        for (int j = 0; j < n_; ++j) cost[j] = c_[j];
        if (!iterate(cost, /*allow_artificials=*/false)) {
            out.status = unbounded_ ? LpStatus::Unbounded : LpStatus::Stalled;
            return out;
        }
        out.status = LpStatus::Optimal;
        out.x.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) out.x[basis_[i]] = xb_[i];
        out.value = dot(out.x, c_);
        out.y = duals(cost);
        return out;
    }

  private:
    Vec column(int j) const {
        Vec col(m_);
        if (j < n_)
            for (int i = 0; i < m_; ++i) col[i] = E_(i, j);
        else
            for (int i = 0; i < m_; ++i) col[i] = (i == j - n_) ? 1.0 : 0.0;
        return col;
    }

    LuFactors factor_basis() const {
        Mat B(m_, m_);
        for (int i = 0; i < m_; ++i) {
            Vec col = column(basis_[i]);
            for (int r = 0; r < m_; ++r) B(r, i) = col[r];
        }
        return lu_factor(std::move(B));
    }

    Vec duals(const Vec& cost) const {
        LuFactors f = factor_basis();
        Vec cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
        return lu_solve_transposed(f, std::move(cb));
    }

    bool iterate(const Vec& cost, bool allow_artificials) {
        unbounded_ = false;
        const long long max_pivots = 400ll * (m_ + 64);
        for (long long pivot = 0; pivot < max_pivots; ++pivot) {
            LuFactors f = factor_basis();
            if (f.singular) return false;
            // fresh basic point every pivot: incremental updates drift over
            // long degenerate runs and poison the ratio test
            xb_ = lu_solve(f, b_);
            for (int i = 0; i < m_; ++i)
                if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
            Vec cb(m_);
            for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
            Vec y = lu_solve_transposed(f, std::move(cb));
            // pricing: Dantzig, with Bland fallback late for anti-cycling
            const bool bland = pivot > 200ll * (m_ + 16);
            int enter = -1;
            double best = -1e-9;
            const int ncols = allow_artificials ? n_ + m_ : n_;
            for (int j = 0; j < ncols; ++j) {
                double rc = cost[j];
                if (j < n_) {
                    for (int i = 0; i < m_; ++i) rc -= y[i] * E_(i, j);
                } else {
                    rc -= y[j - n_];
                }
                if (rc < best - 1e-12) {
                    enter = j;
                    best = rc;
                    if (bland) break;
                }
            }
            if (enter < 0) return true;  // optimal for this phase
            Vec dir = lu_solve(f, column(enter));
            int leave = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m_; ++i) {
                double ratio;
                if (dir[i] > 1e-10) {
                    ratio = std::max(0.0, xb_[i]) / dir[i];
                } else if (basis_[i] >= n_ && dir[i] < -1e-10) {
                    // a basic artificial must never grow above zero; it
                    // blocks immediately and leaves the basis instead
                    ratio = std::max(0.0, -xb_[i] / dir[i]);
                } else {
                    continue;
                }
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis_[i] > basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) {
                unbounded_ = true;
                return false;
            }
            basis_[leave] = enter;
        }
        return false;
    }

    Mat E_;
    Vec b_;
    Vec c_;
    int m_, n_;
    std::vector<int> basis_;
    Vec xb_;
    bool unbounded_ = false;
};

// One constrained sample: a grid point together with the region whose piece
// it is evaluated under. Breakpoints appear twice, once per side.
struct Sample {
    double x;
    int region;
};

std::vector<Sample> build_samples(double a, double b, const std::vector<Region>& regions,
                                  int grid_n) {
    std::vector<double> grid(grid_n);
    for (int k = 0; k < grid_n; ++k)
        grid[k] = a + (b - a) * static_cast<double>(k) / (grid_n - 1);
    for (const auto& r : regions) grid.push_back(r.lower);
    grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double u, double v) { return std::fabs(u - v) < 1e-12; }),
               grid.end());
    std::vector<Sample> samples;
    for (int ri = 0; ri < static_cast<int>(regions.size()); ++ri) {
        auto lo = std::lower_bound(grid.begin(), grid.end(), regions[ri].lower - 1e-12);
        for (auto it = lo; it != grid.end() && *it <= regions[ri].upper + 1e-12; ++it)
            samples.push_back({*it, ri});
    }
    return samples;
}

// The grid LP in mass form: min sum p_k f(x_k) s.t. sum p = 1,
// sum_k p_k g_j(x_k) >= 0, p >= 0. Strong duality gives sup lambda_0 and
// the multipliers come back as the row duals. Infeasibility of the mass
// form certifies that the lambda_0 program is unbounded.
LpResult mass_lp(const std::vector<double>& fvals,
                 const std::vector<std::vector<double>>& gvals,
                 const std::vector<char>& carries_mass, const SdpSettings&) {
    const int npts = static_cast<int>(fvals.size());
    const int ng = static_cast<int>(gvals.size());
    // columns: the masses, then one surplus per gamble row
    Mat E(1 + ng, npts + ng);
    Vec b(1 + ng, 0.0), c(npts + ng, 0.0);
    b[0] = 1.0;
    for (int k = 0; k < npts; ++k) {
        E(0, k) = carries_mass[k] ? 1.0 : 0.0;
        c[k] = fvals[k];
    }
    for (int j = 0; j < ng; ++j) {
        for (int k = 0; k < npts; ++k) E(1 + j, k) = gvals[j][k];
        E(1 + j, npts + j) = -1.0;
    }

    SimplexOut sol = DenseSimplex(std::move(E), std::move(b), std::move(c)).run();
    LpResult r;
    switch (sol.status) {
        case LpStatus::Optimal:
            r.status = PrevisionStatus::Value;
            r.value = sol.value;
            r.lambda0 = sol.y[0];
            for (int j = 0; j < ng; ++j) r.lambda.push_back(sol.y[1 + j]);
            return r;
        case LpStatus::Infeasible:
            r.status = PrevisionStatus::Unbounded;
            return r;
        case LpStatus::Unbounded:
            r.status = PrevisionStatus::InfeasibleAssessments;
            return r;
        default:
            return r;
    }
}

}  // namespace

LpResult lp_lower_prevision(double a, double b,
                            const std::vector<PiecewisePolynomial>& gambles,
                            const PiecewisePolynomial& f, int grid_n,
                            const SdpSettings& settings) {
    if (grid_n < 100) throw std::invalid_argument("lp oracle: grid_n must be >= 100");
    std::vector<PiecewisePolynomial> all = gambles;
    all.push_back(f);
    std::vector<Region> regions = partition(a, b, all);
    std::vector<Sample> samples = build_samples(a, b, regions, grid_n);

    std::vector<Polynomial> fpieces = detail::pieces_on_regions(f, regions);
    std::vector<std::vector<Polynomial>> gpieces;
    for (const auto& g : gambles) gpieces.push_back(detail::pieces_on_regions(g, regions));

    const size_t npts = samples.size();
    std::vector<double> fvals(npts);
    std::vector<std::vector<double>> gvals(gambles.size(), std::vector<double>(npts));
    std::vector<char> mass(npts, 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (size_t k = 0; k < npts; ++k) {
        fvals[k] = fpieces[samples[k].region].eval1(samples[k].x);
        for (size_t j = 0; j < gambles.size(); ++j)
            gvals[j][k] = gpieces[j][samples[k].region].eval1(samples[k].x);
    }
    return mass_lp(fvals, gvals, mass, settings);
}

LpResult lp_upper_prevision(double a, double b,
                            const std::vector<PiecewisePolynomial>& gambles,
                            const PiecewisePolynomial& f, int grid_n,
                            const SdpSettings& settings) {
    LpResult r = lp_lower_prevision(a, b, gambles, -f, grid_n, settings);
    switch (r.status) {
        case PrevisionStatus::Value:
            r.value = -r.value;
            r.lambda0 = -r.lambda0;
            break;
        case PrevisionStatus::Unbounded:
            r.status = PrevisionStatus::InfeasibleAssessments;
            break;
        case PrevisionStatus::InfeasibleAssessments:
            r.status = PrevisionStatus::Unbounded;
            break;
        default:
            break;
    }
    return r;
}

LpResult lp_conditional(double a, double b,
                        const std::vector<PiecewisePolynomial>& gambles, double a_lo,
                        double a_hi, const PiecewisePolynomial& f, int grid_n,
                        const SdpSettings& settings) {
    if (grid_n < 100) throw std::invalid_argument("lp oracle: grid_n must be >= 100");
    const double lo = std::max(a, a_lo), hi = std::min(b, a_hi);
    if (!(lo < hi))
        throw std::invalid_argument("lp_conditional: the event does not meet the domain");
    std::vector<PiecewisePolynomial> all = gambles;
    all.push_back(f);
    std::vector<Region> regions = partition(a, b, all, {lo, hi});
    std::vector<Sample> samples = build_samples(a, b, regions, grid_n);

    std::vector<Polynomial> fpieces = detail::pieces_on_regions(f, regions);
    std::vector<std::vector<Polynomial>> gpieces;
    for (const auto& g : gambles) gpieces.push_back(detail::pieces_on_regions(g, regions));
    std::vector<char> in_A(regions.size());
    for (size_t ri = 0; ri < regions.size(); ++ri) {
        const double mid = 0.5 * (regions[ri].lower + regions[ri].upper);
        in_A[ri] = (mid >= lo && mid <= hi) ? 1 : 0;
    }

    // Objective mass lives on A only; complement points carry multiplier
    // constraints but no normalization and no objective.
    const size_t npts = samples.size();
    std::vector<double> fvals(npts, 0.0);
    std::vector<std::vector<double>> gvals(gambles.size(), std::vector<double>(npts));
    std::vector<char> mass(npts, 0);
    for (size_t k = 0; k < npts; ++k) {
        const int ri = samples[k].region;
        if (in_A[ri]) {
            mass[k] = 1;
            fvals[k] = fpieces[ri].eval1(samples[k].x);
        }
        for (size_t j = 0; j < gambles.size(); ++j)
            gvals[j][k] = gpieces[j][ri].eval1(samples[k].x);
    }
    return mass_lp(fvals, gvals, mass, settings);
}

}  // namespace sosg
