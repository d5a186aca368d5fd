#include "sosg/prevision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sosg {

namespace detail {

std::optional<std::pair<double, double>> interval_bounds(const SemiAlgebraicSet& omega) {
    if (omega.n != 1 || omega.constraints.empty()) return std::nullopt;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : omega.constraints) {
        if (c.degree() > 1) return std::nullopt;
        const double p = c.coefficient(Monomial({1}));
        const double q = c.coefficient(Monomial({0}));
        if (p > 0.0)
            lo = std::max(lo, -q / p);
        else if (p < 0.0)
            hi = std::min(hi, -q / p);
        // constant constraints carry no bound
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) return std::nullopt;
    return std::make_pair(lo, hi);
}

BoxScale pick_scale(const SemiAlgebraicSet& omega, bool auto_rescale, bool aggressive) {
    BoxScale s;
    if (!auto_rescale) return s;
    auto iv = interval_bounds(omega);
    if (!iv) return s;
    const bool wide = iv->second - iv->first > 10.0;
    const bool off_unit =
        aggressive && (std::fabs(iv->first) > 2.0 || std::fabs(iv->second) > 2.0);
    if (wide || off_unit) {
        s.active = true;
        s.a = iv->first;
        s.w = iv->second - iv->first;
    }
    return s;
}

Polynomial to_unit(const Polynomial& p, const BoxScale& s) {
    if (!s.active) return p;
    return p.substitute_affine({s.a}, {s.w});
}

GramRepresentation gram_to_original(const GramRepresentation& g, const BoxScale& s) {
    if (!s.active) return g;
    // t^r = sum_c C(r,c) (-a)^{r-c} w^{-r} x^c; the Gram transforms by
    // congruence with that basis-change matrix.
    const int sd = g.basis.size();
    Mat T(sd, sd);
    for (int r = 0; r < sd; ++r) {
        double wr = std::pow(s.w, -r);
        double binom = 1.0;
        for (int c = 0; c <= r; ++c) {
            T(r, c) = binom * std::pow(-s.a, r - c) * wr;
            binom = binom * (r - c) / (c + 1.0);
        }
    }
    GramRepresentation out;
    out.basis = g.basis;
    out.Q = matmul(matmul(transpose(T), g.Q), T);
    for (int i = 0; i < sd; ++i)
        for (int j = 0; j < i; ++j) {
            double v = 0.5 * (out.Q(i, j) + out.Q(j, i));
            out.Q(i, j) = v;
            out.Q(j, i) = v;
        }
    return out;
}

XiCertificate certificate_to_original(const XiCertificate& c, const BoxScale& s,
                                      const std::vector<double>& constraint_scales) {
    if (!s.active) return c;
    XiCertificate out;
    out.sigma0 = gram_to_original(c.sigma0, s);
    for (size_t j = 0; j < c.sigmas.size(); ++j) {
        GramRepresentation g = gram_to_original(c.sigmas[j], s);
        const double k = constraint_scales[j];
        for (auto& v : g.Q.a) v /= k;
        out.sigmas.push_back(std::move(g));
    }
    return out;
}

namespace {

struct ScaledInstance {
    SemiAlgebraicSet omega;
    std::vector<Polynomial> gambles;  // normalized: unit max coefficient
    std::vector<double> gamble_scales;
    Polynomial f;
    BoxScale scale;
    std::vector<double> constraint_scales;

    // multipliers of the normalized gambles, mapped back to the originals
    std::vector<double> lambda_to_original(const std::vector<double>& lam) const {
        std::vector<double> out(lam.size());
        for (size_t j = 0; j < lam.size(); ++j) out[j] = lam[j] / gamble_scales[j];
        return out;
    }
};

ScaledInstance rescale_instance(const AssessmentSet& a, const Polynomial& f,
                                bool auto_rescale, bool aggressive = true) {
    ScaledInstance si;
    si.scale = pick_scale(a.omega, auto_rescale, aggressive);
    si.f = to_unit(f, si.scale);
    for (const auto& g : a.gambles) {
        Polynomial gt = to_unit(g, si.scale);
        double k = gt.max_abs_coefficient();
        if (k <= 0.0) k = 1.0;
        si.gamble_scales.push_back(k);
        si.gambles.push_back(gt * (1.0 / k));
    }
    si.omega.n = a.omega.n;
    for (const auto& c : a.omega.constraints) {
        Polynomial ct = to_unit(c, si.scale);
        double k = 1.0;
        if (si.scale.active) {
            k = ct.max_abs_coefficient();
            if (k <= 0.0) k = 1.0;
            ct = ct * (1.0 / k);
        }
        si.constraint_scales.push_back(k);
        si.omega.constraints.push_back(std::move(ct));
    }
    return si;
}

}  // namespace
}  // namespace detail

void AssessmentSet::validate(const Polynomial* f) const {
    int need = omega.max_half_degree();
    for (const auto& g : gambles) {
        if (g.var_count() != omega.n)
            throw std::invalid_argument("assessments: gamble variable count mismatch");
        need = std::max(need, (g.degree() + 1) / 2);
    }
    if (f) {
        if (f->var_count() != omega.n)
            throw std::invalid_argument("assessments: f variable count mismatch");
        need = std::max(need, (f->degree() + 1) / 2);
    }
    if (degree < need)
        throw std::invalid_argument(
            "assessments: relaxation degree below the minimum admissible d");
    if (degree < 1) throw std::invalid_argument("assessments: degree must be >= 1");
}

namespace {

struct PrimalProgram {
    SdpProblem prob;
    int l0 = -1;
    std::vector<int> lambda_blocks;
    detail::XiBlocks xb;
};

// max l0 s.t. target - l0*[with_l0] - sum_j lambda_j g_j in Xi_2d(omega).
PrimalProgram build_primal(const SemiAlgebraicSet& omega,
                           const std::vector<Polynomial>& gambles, const Polynomial& target,
                           int d, bool with_l0) {
    PrimalProgram P;
    P.prob.sense = Sense::Maximize;
    if (with_l0) {
        P.l0 = P.prob.add_free();
        P.prob.objective_free(P.l0, 1.0);
    }
    for (size_t j = 0; j < gambles.size(); ++j)
        P.lambda_blocks.push_back(P.prob.add_block(1));

    const MonomialBasis full = monomial_basis(omega.n, 2 * d);
    std::vector<int> rows(full.size());
    for (int k = 0; k < full.size(); ++k)
        rows[k] = P.prob.add_constraint(target.coefficient(full.monomials[k]));
    if (with_l0) P.prob.term_free(rows[0], P.l0, 1.0);
    for (size_t j = 0; j < gambles.size(); ++j)
        for (const auto& [m, c] : gambles[j].terms())
            P.prob.term_entry(rows[full.index_of(m)], P.lambda_blocks[j], 0, 0, c);
    P.xb = detail::add_xi_blocks(P.prob, rows, full, omega, d);
    return P;
}

bool verify_primal_certificate(const SemiAlgebraicSet& omega,
                               const std::vector<Polynomial>& gambles,
                               const Polynomial& target, double l0,
                               const std::vector<double>& lambda,
                               const XiCertificate& cert) {
    Polynomial lhs = target - Polynomial::constant(omega.n, l0);
    for (size_t j = 0; j < gambles.size(); ++j) lhs = lhs - gambles[j] * lambda[j];
    Polynomial diff = lhs - cert.reconstruct(omega);
    return diff.max_abs_coefficient() <= 1e-6 * (1.0 + lhs.max_abs_coefficient());
}

}  // namespace

Verdict extends(const AssessmentSet& a, const Polynomial& f, const SdpSettings& settings) {
    a.validate(&f);
    PrimalProgram P = build_primal(a.omega, a.gambles, f, a.degree, /*with_l0=*/false);
    SdpSolution sol = solve(P.prob, settings);
    switch (sol.status) {
        case SdpStatus::Optimal:
            return Verdict::True;
        case SdpStatus::Infeasible:
            return Verdict::False;
        default:
            return Verdict::Inconclusive;
    }
}

PrevisionResult lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                const SdpSettings& settings, bool auto_rescale) {
    a.validate(&f);
    detail::ScaledInstance si = detail::rescale_instance(a, f, auto_rescale);
    PrimalProgram P = build_primal(si.omega, si.gambles, si.f, a.degree, true);
    SdpSolution sol = solve(P.prob, settings);

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
    r.value = sol.free_values[P.l0];
    std::vector<double> lam_scaled;
    for (int b : P.lambda_blocks) lam_scaled.push_back(sol.block_scalar(b));
    r.lambda = si.lambda_to_original(lam_scaled);
    XiCertificate cert = detail::xi_from_solution(sol, P.xb);
    if (verify_primal_certificate(si.omega, si.gambles, si.f, r.value, lam_scaled, cert))
        r.certificate =
            detail::certificate_to_original(cert, si.scale, si.constraint_scales);
    return r;
}

PrevisionResult upper_prevision(const AssessmentSet& a, const Polynomial& f,
                                const SdpSettings& settings, bool auto_rescale) {
    PrevisionResult low = lower_prevision(a, -f, settings, auto_rescale);
    PrevisionResult r = std::move(low);
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

AslResult avoids_sure_loss(const AssessmentSet& a, const SdpSettings& settings) {
    a.validate();
    detail::ScaledInstance si =
        detail::rescale_instance(a, Polynomial::constant(a.omega.n, 0.0), true);

    SdpProblem prob;
    prob.sense = Sense::Maximize;
    const int l0 = prob.add_block(1);  // 0 <= lambda_0
    const int slack = prob.add_block(1);
    prob.objective_entry(l0, 0, 0, 1.0);
    std::vector<int> lambda_blocks;
    for (size_t j = 0; j < si.gambles.size(); ++j) lambda_blocks.push_back(prob.add_block(1));

    const MonomialBasis full = monomial_basis(a.omega.n, 2 * a.degree);
    std::vector<int> rows(full.size());
    for (int k = 0; k < full.size(); ++k) rows[k] = prob.add_constraint(0.0);
    prob.term_entry(rows[0], l0, 0, 0, 1.0);
    for (size_t j = 0; j < si.gambles.size(); ++j)
        for (const auto& [m, c] : si.gambles[j].terms())
            prob.term_entry(rows[full.index_of(m)], lambda_blocks[j], 0, 0, c);
    detail::add_xi_blocks(prob, rows, full, si.omega, a.degree);
    const int cap = prob.add_constraint(1.0);  // lambda_0 <= 1
    prob.term_entry(cap, l0, 0, 0, 1.0);
    prob.term_entry(cap, slack, 0, 0, 1.0);

    SdpSolution sol = solve(prob, settings);
    AslResult r;
    if (sol.status != SdpStatus::Optimal) return r;
    r.lambda0 = sol.block_scalar(l0);
    std::vector<double> lam_scaled;
    for (int b : lambda_blocks) lam_scaled.push_back(sol.block_scalar(b));
    r.lambda = si.lambda_to_original(lam_scaled);
    // The optimum is exactly 0 or 1; anything in between signals numerical
    // trouble and stays inconclusive.
    if (r.lambda0 < 0.01)
        r.outcome = AslResult::Outcome::Avoids;
    else if (r.lambda0 > 0.99)
        r.outcome = AslResult::Outcome::SureLoss;
    return r;
}

DualPrevisionResult dual_lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                         const SdpSettings& settings, bool auto_rescale) {
    a.validate(&f);
    detail::ScaledInstance si =
        detail::rescale_instance(a, f, auto_rescale, /*aggressive=*/true);
    const int n = a.omega.n, d = a.degree;
    const MonomialBasis full = monomial_basis(n, 2 * d);

    SdpProblem prob;
    prob.sense = Sense::Minimize;
    std::vector<int> yv(full.size());
    for (int k = 0; k < full.size(); ++k) yv[k] = prob.add_free();
    for (const auto& [m, c] : si.f.terms()) prob.objective_free(yv[full.index_of(m)], c);

    // L(1) = 1
    const int norm_row = prob.add_constraint(1.0);
    prob.term_free(norm_row, yv[0], 1.0);
    // L(g_j) >= 0 via slacks
    for (const auto& g : si.gambles) {
        const int t = prob.add_block(1);
        const int row = prob.add_constraint(0.0);
        for (const auto& [m, c] : g.terms()) prob.term_free(row, yv[full.index_of(m)], c);
        prob.term_entry(row, t, 0, 0, -1.0);
    }
    // moment matrix psd: tie a psd block entrywise to y
    const MonomialBasis half = monomial_basis(n, d);
    const int m0 = prob.add_block(half.size());
    for (int i = 0; i < half.size(); ++i)
        for (int j = 0; j <= i; ++j) {
            const int row = prob.add_constraint(0.0);
            prob.term_entry(row, m0, i, j, 1.0);
            prob.term_free(row, yv[full.index_of(half.monomials[i] + half.monomials[j])],
                           -1.0);
        }
    // localizing matrices psd
    for (size_t cj = 0; cj < si.omega.constraints.size(); ++cj) {
        const Polynomial& c = si.omega.constraints[cj];
        const int dj = d - si.omega.half_degree(static_cast<int>(cj));
        const MonomialBasis bj = monomial_basis(n, dj);
        const int mj = prob.add_block(bj.size());
        for (int i = 0; i < bj.size(); ++i)
            for (int j = 0; j <= i; ++j) {
                const int row = prob.add_constraint(0.0);
                prob.term_entry(row, mj, i, j, 1.0);
                for (const auto& [gamma, cv] : c.terms())
                    prob.term_free(
                        row, yv[full.index_of(bj.monomials[i] + bj.monomials[j] + gamma)],
                        -cv);
            }
    }

    SdpSolution sol = solve(prob, settings);
    DualPrevisionResult r;
    switch (sol.status) {
        case SdpStatus::Optimal:
            break;
        case SdpStatus::Unbounded:  // inf L(f) = -inf: no lambda_0 is feasible
            r.status = PrevisionStatus::InfeasibleAssessments;
            return r;
        case SdpStatus::Infeasible:  // no normalized y: primal supremum is +inf
            r.status = PrevisionStatus::Unbounded;
            return r;
        default:
            r.status = PrevisionStatus::Inconclusive;
            return r;
    }
    r.status = PrevisionStatus::Value;
    r.value = sol.objective;
    // moments back in original coordinates: L(x^k) = sum_i C(k,i) a^{k-i} w^i L(t^i)
    r.y = MomentVector::zero(n, d);
    if (!si.scale.active) {
        for (int k = 0; k < full.size(); ++k) r.y.y[k] = sol.free_values[yv[k]];
    } else {
        for (int k = 0; k < full.size(); ++k) {
            const int deg = full.monomials[k].degree();
            double v = 0.0, binom = 1.0;
            for (int i = 0; i <= deg; ++i) {
                v += binom * std::pow(si.scale.a, deg - i) * std::pow(si.scale.w, i) *
                     sol.free_values[yv[i]];
                binom = binom * (deg - i) / (i + 1.0);
            }
            r.y.y[k] = v;
        }
    }
    return r;
}

std::vector<std::pair<int, PrevisionResult>> degree_sweep(const AssessmentSet& a_template,
                                                          const Polynomial& f,
                                                          const std::vector<int>& degrees,
                                                          const SdpSettings& settings) {
    for (size_t i = 1; i < degrees.size(); ++i)
        if (degrees[i] <= degrees[i - 1])
            throw std::invalid_argument("degree_sweep: degrees must be increasing");
    if (degrees.empty()) return {};
    {
        // reject bad degree bookkeeping here; nothing may throw inside the
        // parallel sweep
        AssessmentSet probe = a_template;
        probe.degree = degrees.front();
        probe.validate(&f);
    }
    std::vector<std::pair<int, PrevisionResult>> out(degrees.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < degrees.size(); ++i) {
        AssessmentSet a = a_template;
        a.degree = degrees[i];
        try {
            out[i] = {degrees[i], lower_prevision(a, f, settings)};
        } catch (const std::exception&) {
            out[i] = {degrees[i], PrevisionResult{}};
        }
    }
    return out;
}

}  // namespace sosg
