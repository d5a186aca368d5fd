#include "sosg/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sosg {

int PiecewisePolynomial::piece_index(double x) const {
    return static_cast<int>(
        std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin());
}

double PiecewisePolynomial::eval(double x) const {
    return pieces[piece_index(x)].eval1(x);
}

int PiecewisePolynomial::max_degree() const {
    int d = 0;
    for (const auto& p : pieces) d = std::max(d, p.degree());
    return d;
}

PiecewisePolynomial PiecewisePolynomial::from_polynomial(const Polynomial& p) {
    if (p.var_count() != 1)
        throw std::invalid_argument("piecewise: pieces must be univariate");
    PiecewisePolynomial f;
    f.pieces.push_back(p);
    return f;
}

PiecewisePolynomial PiecewisePolynomial::constant(double c) {
    return from_polynomial(Polynomial::constant(1, c));
}

namespace {

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    std::vector<double> m;
    m.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
    std::vector<double> out;
    for (double x : m)
        if (out.empty() || x - out.back() > kBreakpointTol) out.push_back(x);
    return out;
}

template <typename Op>
PiecewisePolynomial combine(const PiecewisePolynomial& a, const PiecewisePolynomial& b,
                            Op op) {
    PiecewisePolynomial r;
    r.breakpoints = merge_breakpoints(a.breakpoints, b.breakpoints);
    const int k = static_cast<int>(r.breakpoints.size());
    for (int i = 0; i <= k; ++i) {
        const double probe = (i == 0) ? (k == 0 ? 0.0 : r.breakpoints.front() - 1.0)
                                      : r.breakpoints[i - 1];
        r.pieces.push_back(op(a.pieces[a.piece_index(probe)], b.pieces[b.piece_index(probe)]));
    }
    return r;
}

}  // namespace

PiecewisePolynomial PiecewisePolynomial::operator+(const PiecewisePolynomial& o) const {
    return combine(*this, o, [](const Polynomial& x, const Polynomial& y) { return x + y; });
}

PiecewisePolynomial PiecewisePolynomial::operator-(const PiecewisePolynomial& o) const {
    return combine(*this, o, [](const Polynomial& x, const Polynomial& y) { return x - y; });
}

PiecewisePolynomial PiecewisePolynomial::operator*(const PiecewisePolynomial& o) const {
    return combine(*this, o, [](const Polynomial& x, const Polynomial& y) { return x * y; });
}

PiecewisePolynomial PiecewisePolynomial::operator-() const {
    PiecewisePolynomial r = *this;
    for (auto& p : r.pieces) p = -p;
    return r;
}

PiecewisePolynomial call_payoff(double strike) {
    if (!std::isfinite(strike)) throw std::invalid_argument("call_payoff: strike not finite");
    PiecewisePolynomial f;
    f.breakpoints = {strike};
    f.pieces.push_back(Polynomial(1));
    f.pieces.push_back(Polynomial::variable(1, 0) - Polynomial::constant(1, strike));
    return f;
}

PiecewisePolynomial indicator_at_least(double c) {
    PiecewisePolynomial f;
    f.breakpoints = {c};
    f.pieces.push_back(Polynomial(1));
    f.pieces.push_back(Polynomial::constant(1, 1.0));
    return f;
}

std::vector<Region> partition(double a, double b,
                              const std::vector<PiecewisePolynomial>& gambles,
                              const std::vector<double>& extra_points) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("partition: domain must be a nonempty finite interval");
    std::vector<double> cuts;
    for (const auto& g : gambles)
        for (double x : g.breakpoints) cuts.push_back(x);
    for (double x : extra_points) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> inner;
    for (double x : cuts) {
        if (x <= a + kBreakpointTol || x >= b - kBreakpointTol) continue;
        if (inner.empty() || x - inner.back() > kBreakpointTol) inner.push_back(x);
    }
    std::vector<Region> regions;
    double lo = a;
    for (double x : inner) {
        regions.push_back({lo, x});
        lo = x;
    }
    regions.push_back({lo, b});
    return regions;
}

namespace detail {

std::vector<Polynomial> pieces_on_regions(const PiecewisePolynomial& f,
                                          const std::vector<Region>& regions) {
    std::vector<Polynomial> out;
    for (const auto& r : regions)
        out.push_back(f.pieces[f.piece_index(0.5 * (r.lower + r.upper))]);
    return out;
}

namespace {

Polynomial scale_poly(const Polynomial& p, const BoxScale& s) { return to_unit(p, s); }

}  // namespace

PrevisionResult solve_region_program(double a, double b,
                                     const std::vector<RegionGroup>& groups,
                                     size_t gamble_count, int d,
                                     const SdpSettings& settings) {
    if (d < 1) throw std::invalid_argument("region program: d must be >= 1");
    BoxScale scale;
    if (std::fabs(a) > kBreakpointTol || std::fabs(b - 1.0) > kBreakpointTol) {
        scale.active = true;
        scale.a = a;
        scale.w = b - a;
    }

    SdpProblem prob;
    prob.sense = Sense::Maximize;
    const int l0 = prob.add_free();
    prob.objective_free(l0, 1.0);
    std::vector<int> lambda_blocks;
    for (size_t j = 0; j < gamble_count; ++j) lambda_blocks.push_back(prob.add_block(1));

    const MonomialBasis full = monomial_basis(1, 2 * d);
    struct GroupBuild {
        XiBlocks xb;
        SemiAlgebraicSet omega_t;
        Polynomial target_t = Polynomial(1);
        std::optional<Polynomial> l0_t;
        std::vector<Polynomial> gambles_t;
    };
    std::vector<GroupBuild> built;

    // one positive normalization per shared multiplier, across all regions
    std::vector<double> gamble_scales(gamble_count, 0.0);
    for (const auto& g : groups)
        for (size_t j = 0; j < gamble_count; ++j)
            gamble_scales[j] = std::max(
                gamble_scales[j], scale_poly(g.gambles[j], scale).max_abs_coefficient());
    for (auto& k : gamble_scales)
        if (k <= 0.0) k = 1.0;

    for (const auto& g : groups) {
        if (g.gambles.size() != gamble_count)
            throw std::invalid_argument("region program: inconsistent gamble pieces");
        GroupBuild gb;
        gb.target_t = scale_poly(g.target, scale);
        if (g.l0_coef) gb.l0_t = scale_poly(*g.l0_coef, scale);
        for (size_t j = 0; j < gamble_count; ++j)
            gb.gambles_t.push_back(scale_poly(g.gambles[j], scale) *
                                   (1.0 / gamble_scales[j]));
        const double lo_t = scale.active ? (g.lo - scale.a) / scale.w : g.lo;
        const double hi_t = scale.active ? (g.hi - scale.a) / scale.w : g.hi;
        gb.omega_t = SemiAlgebraicSet::interval(lo_t, hi_t);

        if (gb.target_t.degree() > 2 * d)
            throw std::invalid_argument("region program: piece degree exceeds 2d");
        for (const auto& piece : gb.gambles_t)
            if (piece.degree() > 2 * d)
                throw std::invalid_argument("region program: piece degree exceeds 2d");

        std::vector<int> rows(full.size());
        for (int k = 0; k < full.size(); ++k)
            rows[k] = prob.add_constraint(gb.target_t.coefficient(full.monomials[k]));
        if (gb.l0_t) {
            if (gb.l0_t->degree() > 2 * d)
                throw std::invalid_argument("region program: weight degree exceeds 2d");
            for (const auto& [m, c] : gb.l0_t->terms())
                prob.term_free(rows[full.index_of(m)], l0, c);
        }
        for (size_t j = 0; j < gamble_count; ++j)
            for (const auto& [m, c] : gb.gambles_t[j].terms())
                prob.term_entry(rows[full.index_of(m)], lambda_blocks[j], 0, 0, c);
        gb.xb = add_xi_blocks(prob, rows, full, gb.omega_t, d);
        built.push_back(std::move(gb));
    }

    SdpSolution sol = solve(prob, settings);
    PrevisionResult r;
    switch (sol.status) {
        case SdpStatus::Optimal:
            break;
        case SdpStatus::Unbounded:
            r.status = PrevisionStatus::Unbounded;
            return r;
        case SdpStatus::Infeasible:
            r.status = PrevisionStatus::InfeasibleAssessments;
            return r;
        default:
            r.status = PrevisionStatus::Inconclusive;
            return r;
    }
    r.status = PrevisionStatus::Value;
    r.value = sol.free_values[l0];
    std::vector<double> lam_scaled;
    for (int bk : lambda_blocks) lam_scaled.push_back(sol.block_scalar(bk));
    for (size_t j = 0; j < gamble_count; ++j)
        r.lambda.push_back(lam_scaled[j] / gamble_scales[j]);

    const std::vector<double> cscales = {scale.active ? scale.w : 1.0,
                                         scale.active ? scale.w : 1.0};
    for (const auto& gb : built) {
        XiCertificate cert = xi_from_solution(sol, gb.xb);
        Polynomial lhs = gb.target_t;
        if (gb.l0_t) lhs = lhs - *gb.l0_t * r.value;
        for (size_t j = 0; j < gamble_count; ++j)
            lhs = lhs - gb.gambles_t[j] * lam_scaled[j];
        Polynomial diff = lhs - cert.reconstruct(gb.omega_t);
        if (diff.max_abs_coefficient() > 1e-6 * (1.0 + lhs.max_abs_coefficient())) {
            r.region_certificates.clear();
            break;
        }
        r.region_certificates.push_back(certificate_to_original(cert, scale, cscales));
    }
    return r;
}

}  // namespace detail

namespace {

void validate_pw(double a, double b, const std::vector<PiecewisePolynomial>& gambles,
                 const PiecewisePolynomial* f, int d) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("piecewise previsions need a compact interval domain");
    if (d < 1) throw std::invalid_argument("piecewise previsions need d >= 1");
    int deg = f ? f->max_degree() : 0;
    for (const auto& g : gambles) deg = std::max(deg, g.max_degree());
    if (deg > 2 * d)
        throw std::invalid_argument("piecewise previsions: piece degree exceeds 2d");
}

}  // namespace

PrevisionResult pw_lower_prevision(double a, double b,
                                   const std::vector<PiecewisePolynomial>& gambles,
                                   const PiecewisePolynomial& f, int d,
                                   const SdpSettings& settings) {
    validate_pw(a, b, gambles, &f, d);
    std::vector<PiecewisePolynomial> all = gambles;
    all.push_back(f);
    std::vector<Region> regions = partition(a, b, all);
    std::vector<detail::RegionGroup> groups;
    for (const auto& reg : regions) {
        detail::RegionGroup g;
        g.lo = reg.lower;
        g.hi = reg.upper;
        g.target = f.pieces[f.piece_index(0.5 * (reg.lower + reg.upper))];
        g.l0_coef = Polynomial::constant(1, 1.0);
        for (const auto& gamble : gambles)
            g.gambles.push_back(gamble.pieces[gamble.piece_index(0.5 * (reg.lower + reg.upper))]);
        groups.push_back(std::move(g));
    }
    return detail::solve_region_program(a, b, groups, gambles.size(), d, settings);
}

PrevisionResult pw_upper_prevision(double a, double b,
                                   const std::vector<PiecewisePolynomial>& gambles,
                                   const PiecewisePolynomial& f, int d,
                                   const SdpSettings& settings) {
    PrevisionResult r = pw_lower_prevision(a, b, gambles, -f, d, settings);
    switch (r.status) {
        case PrevisionStatus::Value:
            r.value = -r.value;
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

AslResult pw_avoids_sure_loss(double a, double b,
                              const std::vector<PiecewisePolynomial>& gambles, int d,
                              const SdpSettings& settings) {
    validate_pw(a, b, gambles, nullptr, d);
    std::vector<Region> regions = partition(a, b, gambles);

    // Same per-region program with target 0, but lambda_0 capped to [0,1].
    detail::BoxScale scale;
    if (std::fabs(a) > kBreakpointTol || std::fabs(b - 1.0) > kBreakpointTol) {
        scale.active = true;
        scale.a = a;
        scale.w = b - a;
    }
    SdpProblem prob;
    prob.sense = Sense::Maximize;
    const int l0 = prob.add_block(1);
    const int slack = prob.add_block(1);
    prob.objective_entry(l0, 0, 0, 1.0);
    std::vector<int> lambda_blocks;
    for (size_t j = 0; j < gambles.size(); ++j) lambda_blocks.push_back(prob.add_block(1));

    const MonomialBasis full = monomial_basis(1, 2 * d);
    std::vector<double> gamble_scales(gambles.size(), 0.0);
    for (size_t j = 0; j < gambles.size(); ++j) {
        for (const auto& piece : gambles[j].pieces)
            gamble_scales[j] = std::max(gamble_scales[j],
                                        detail::to_unit(piece, scale).max_abs_coefficient());
        if (gamble_scales[j] <= 0.0) gamble_scales[j] = 1.0;
    }
    for (const auto& reg : regions) {
        const double mid = 0.5 * (reg.lower + reg.upper);
        std::vector<int> rows(full.size());
        for (int k = 0; k < full.size(); ++k) rows[k] = prob.add_constraint(0.0);
        prob.term_entry(rows[0], l0, 0, 0, 1.0);
        for (size_t j = 0; j < gambles.size(); ++j) {
            Polynomial piece =
                detail::to_unit(gambles[j].pieces[gambles[j].piece_index(mid)], scale) *
                (1.0 / gamble_scales[j]);
            for (const auto& [m, c] : piece.terms())
                prob.term_entry(rows[full.index_of(m)], lambda_blocks[j], 0, 0, c);
        }
        const double lo_t = scale.active ? (reg.lower - scale.a) / scale.w : reg.lower;
        const double hi_t = scale.active ? (reg.upper - scale.a) / scale.w : reg.upper;
        detail::add_xi_blocks(prob, rows, full, SemiAlgebraicSet::interval(lo_t, hi_t), d);
    }
    const int cap = prob.add_constraint(1.0);
    prob.term_entry(cap, l0, 0, 0, 1.0);
    prob.term_entry(cap, slack, 0, 0, 1.0);

    SdpSolution sol = solve(prob, settings);
    AslResult r;
    if (sol.status != SdpStatus::Optimal) return r;
    r.lambda0 = sol.block_scalar(l0);
    for (size_t j = 0; j < gambles.size(); ++j)
        r.lambda.push_back(sol.block_scalar(lambda_blocks[j]) / gamble_scales[j]);
    if (r.lambda0 < 0.01)
        r.outcome = AslResult::Outcome::Avoids;
    else if (r.lambda0 > 0.99)
        r.outcome = AslResult::Outcome::SureLoss;
    return r;
}

}  // namespace sosg
