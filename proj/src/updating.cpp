#include "sosg/updating.hpp"

#include <cmath>
#include <stdexcept>

namespace sosg {

namespace {

struct ScaledConditioning {
    SemiAlgebraicSet omega;
    std::vector<Polynomial> gambles;  // normalized to unit max coefficient
    std::vector<double> gamble_scales;
    Polynomial f;
    std::vector<Polynomial> h;
    detail::BoxScale scale;
    std::vector<double> constraint_scales;
    std::vector<double> h_scales;
};

ScaledConditioning rescale_conditioning(const AssessmentSet& a, const Event& event,
                                        const Polynomial& f, bool aggressive) {
    ScaledConditioning sc;
    sc.scale = detail::pick_scale(a.omega, true, aggressive);
    sc.f = detail::to_unit(f, sc.scale);
    for (const auto& g : a.gambles) {
        Polynomial gt = detail::to_unit(g, sc.scale);
        double k = gt.max_abs_coefficient();
        if (k <= 0.0) k = 1.0;
        sc.gamble_scales.push_back(k);
        sc.gambles.push_back(gt * (1.0 / k));
    }
    sc.omega.n = a.omega.n;
    for (const auto& c : a.omega.constraints) {
        Polynomial ct = detail::to_unit(c, sc.scale);
        double k = 1.0;
        if (sc.scale.active) {
            k = ct.max_abs_coefficient();
            if (k <= 0.0) k = 1.0;
            ct = ct * (1.0 / k);
        }
        sc.constraint_scales.push_back(k);
        sc.omega.constraints.push_back(std::move(ct));
    }
    for (const auto& hi : event.h) {
        Polynomial ht = detail::to_unit(hi, sc.scale);
        double k = 1.0;
        if (sc.scale.active) {
            k = ht.max_abs_coefficient();
            if (k <= 0.0) k = 1.0;
            ht = ht * (1.0 / k);
        }
        sc.h_scales.push_back(k);
        sc.h.push_back(std::move(ht));
    }
    return sc;
}

void validate_event(const AssessmentSet& a, const Event& event, const Polynomial& f) {
    a.validate(&f);
    if (event.h.empty()) throw std::invalid_argument("conditioning: empty event");
    for (size_t i = 0; i < event.h.size(); ++i) {
        if (event.h[i].var_count() != a.omega.n)
            throw std::invalid_argument("conditioning: event variable count mismatch");
        if (event.h[i].degree() > 2 * a.degree)
            throw std::invalid_argument("conditioning: deg(h) exceeds 2d");
    }
}

// Does any normalized moment vector satisfy the domain and event localizing
// constraints? Infeasibility is the computational signature of conditioning
// on a null event.
bool normalized_y_exists(const SemiAlgebraicSet& omega, const std::vector<Polynomial>& hs,
                         int d, const SdpSettings& settings) {
    const int n = omega.n;
    const MonomialBasis full = monomial_basis(n, 2 * d);
    SdpProblem prob;
    prob.sense = Sense::Minimize;
    std::vector<int> yv(full.size());
    for (int k = 0; k < full.size(); ++k) yv[k] = prob.add_free();
    const int norm_row = prob.add_constraint(1.0);
    prob.term_free(norm_row, yv[0], 1.0);
    auto tie_block = [&](const Polynomial& c) {
        const int nc = (c.degree() + 1) / 2;
        const MonomialBasis bj = monomial_basis(n, d - nc);
        const int blk = prob.add_block(bj.size());
        for (int i = 0; i < bj.size(); ++i)
            for (int j = 0; j <= i; ++j) {
                const int row = prob.add_constraint(0.0);
                prob.term_entry(row, blk, i, j, 1.0);
                for (const auto& [gamma, cv] : c.terms())
                    prob.term_free(
                        row, yv[full.index_of(bj.monomials[i] + bj.monomials[j] + gamma)],
                        -cv);
            }
    };
    tie_block(Polynomial::constant(n, 1.0));
    for (const auto& c : omega.constraints) tie_block(c);
    for (const auto& h : hs) tie_block(h);
    SdpSolution sol = solve(prob, settings);
    if (sol.status == SdpStatus::Infeasible) return false;
    return true;
}

GramRepresentation rescale_gram(const GramRepresentation& g, const detail::BoxScale& s,
                                double poly_scale) {
    GramRepresentation out = detail::gram_to_original(g, s);
    if (poly_scale != 1.0)
        for (auto& v : out.Q.a) v /= poly_scale;
    return out;
}

ConditionalResult run_conditional(const AssessmentSet& a, const Event& event,
                                  const Polynomial& f, bool multi,
                                  const SdpSettings& settings) {
    validate_event(a, event, f);
    if (!multi && !event.single())
        throw std::invalid_argument(
            "conditional_lower_prevision handles single-constraint events; use the "
            "multi-constraint relaxation");
    for (size_t i = 0; i < event.h.size(); ++i)
        if (a.degree - event.half_degree(static_cast<int>(i)) < 0)
            throw std::invalid_argument("conditioning: d - n_h is negative");

    ScaledConditioning sc = rescale_conditioning(a, event, f, true);
    const int n = a.omega.n, d = a.degree;
    const MonomialBasis full = monomial_basis(n, 2 * d);

    SdpProblem prob;
    prob.sense = Sense::Maximize;
    const int l0 = prob.add_free();
    prob.objective_free(l0, 1.0);
    std::vector<int> lambda_blocks;
    for (size_t j = 0; j < sc.gambles.size(); ++j) lambda_blocks.push_back(prob.add_block(1));

    // group 1: sigma10 + sum sigma1j c_j + sum sigma_a_i h_i + l0 + sum lambda g = f
    std::vector<int> rows1(full.size());
    for (int k = 0; k < full.size(); ++k)
        rows1[k] = prob.add_constraint(sc.f.coefficient(full.monomials[k]));
    prob.term_free(rows1[0], l0, 1.0);
    for (size_t j = 0; j < sc.gambles.size(); ++j)
        for (const auto& [m, c] : sc.gambles[j].terms())
            prob.term_entry(rows1[full.index_of(m)], lambda_blocks[j], 0, 0, c);
    detail::XiBlocks xb1 = detail::add_xi_blocks(prob, rows1, full, sc.omega, d);
    std::vector<int> sa_blocks;
    std::vector<MonomialBasis> sa_bases;
    for (size_t i = 0; i < sc.h.size(); ++i) {
        const int dh = d - event.half_degree(static_cast<int>(i));
        sa_bases.push_back(monomial_basis(n, dh));
        sa_blocks.push_back(prob.add_block(sa_bases.back().size()));
        detail::add_gram_times_poly(prob, rows1, full, sa_blocks.back(), sa_bases.back(),
                                    sc.h[i]);
    }

    // group 2: sigma20 + sum sigma2j c_j - sigma_b h + sum lambda g = 0
    std::vector<int> rows2(full.size());
    for (int k = 0; k < full.size(); ++k) rows2[k] = prob.add_constraint(0.0);
    for (size_t j = 0; j < sc.gambles.size(); ++j)
        for (const auto& [m, c] : sc.gambles[j].terms())
            prob.term_entry(rows2[full.index_of(m)], lambda_blocks[j], 0, 0, c);
    detail::XiBlocks xb2 = detail::add_xi_blocks(prob, rows2, full, sc.omega, d);
    int sb_block = -1;
    MonomialBasis sb_basis;
    if (!multi) {
        const int dh = d - event.half_degree(0);
        sb_basis = monomial_basis(n, dh);
        sb_block = prob.add_block(sb_basis.size());
        detail::add_gram_times_poly(prob, rows2, full, sb_block, sb_basis, sc.h[0], -1.0);
    }

    SdpSolution sol = solve(prob, settings);
    ConditionalResult r;
    switch (sol.status) {
        case SdpStatus::Optimal:
            break;
        case SdpStatus::Unbounded:
            r.status = normalized_y_exists(sc.omega, sc.h, d, settings)
                           ? PrevisionStatus::Unbounded
                           : PrevisionStatus::ConditioningOnNullEvent;
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
    for (int b : lambda_blocks) lam_scaled.push_back(sol.block_scalar(b));
    for (size_t j = 0; j < sc.gambles.size(); ++j)
        r.lambda.push_back(lam_scaled[j] / sc.gamble_scales[j]);

    XiCertificate c1 = detail::xi_from_solution(sol, xb1);
    XiCertificate c2 = detail::xi_from_solution(sol, xb2);
    // verify both equalities in working coordinates before exporting
    Polynomial lhs1 = sc.f - Polynomial::constant(n, r.value);
    Polynomial lhs2(n);
    for (size_t j = 0; j < sc.gambles.size(); ++j) {
        lhs1 = lhs1 - sc.gambles[j] * lam_scaled[j];
        lhs2 = lhs2 - sc.gambles[j] * lam_scaled[j];
    }
    Polynomial rec1 = c1.reconstruct(sc.omega);
    for (size_t i = 0; i < sa_blocks.size(); ++i)
        rec1 = rec1 +
               gram_to_poly({sa_bases[i], sol.block_values[sa_blocks[i]]}) * sc.h[i];
    Polynomial rec2 = c2.reconstruct(sc.omega);
    if (sb_block >= 0)
        rec2 = rec2 - gram_to_poly({sb_basis, sol.block_values[sb_block]}) * sc.h[0];
    const bool ok1 = (lhs1 - rec1).max_abs_coefficient() <=
                     1e-6 * (1.0 + lhs1.max_abs_coefficient());
    const bool ok2 = (lhs2 - rec2).max_abs_coefficient() <=
                     1e-6 * (1.0 + lhs2.max_abs_coefficient());
    if (ok1 && ok2) {
        r.xi1 = detail::certificate_to_original(c1, sc.scale, sc.constraint_scales);
        r.xi2 = detail::certificate_to_original(c2, sc.scale, sc.constraint_scales);
        for (size_t i = 0; i < sa_blocks.size(); ++i)
            r.sigma_a.push_back(rescale_gram({sa_bases[i], sol.block_values[sa_blocks[i]]},
                                             sc.scale, sc.h_scales[i]));
        if (sb_block >= 0)
            r.sigma_b = rescale_gram({sb_basis, sol.block_values[sb_block]}, sc.scale,
                                     sc.h_scales[0]);
    }
    return r;
}

}  // namespace

ConditionalResult conditional_lower_prevision(const AssessmentSet& a, const Event& event,
                                              const Polynomial& f,
                                              const SdpSettings& settings) {
    return run_conditional(a, event, f, /*multi=*/false, settings);
}

ConditionalResult multi_constraint_conditional(const AssessmentSet& a, const Event& event,
                                               const Polynomial& f,
                                               const SdpSettings& settings) {
    return run_conditional(a, event, f, /*multi=*/true, settings);
}

ConditionalDualResult conditional_dual(const AssessmentSet& a, const Event& event,
                                       const Polynomial& f, const SdpSettings& settings) {
    validate_event(a, event, f);
    if (!event.single())
        throw std::invalid_argument("conditional_dual handles single-constraint events");
    if (a.degree - event.half_degree(0) < 0)
        throw std::invalid_argument("conditioning: d - n_h is negative");

    ScaledConditioning sc = rescale_conditioning(a, event, f, true);
    const int n = a.omega.n, d = a.degree;
    const MonomialBasis full = monomial_basis(n, 2 * d);

    SdpProblem prob;
    prob.sense = Sense::Minimize;
    std::vector<int> yv(full.size()), zv(full.size());
    for (int k = 0; k < full.size(); ++k) yv[k] = prob.add_free();
    for (int k = 0; k < full.size(); ++k) zv[k] = prob.add_free();
    for (const auto& [m, c] : sc.f.terms()) prob.objective_free(yv[full.index_of(m)], c);

    const int norm_row = prob.add_constraint(1.0);
    prob.term_free(norm_row, yv[0], 1.0);
    for (const auto& g : sc.gambles) {
        const int t = prob.add_block(1);
        const int row = prob.add_constraint(0.0);
        for (const auto& [m, c] : g.terms()) {
            prob.term_free(row, yv[full.index_of(m)], c);
            prob.term_free(row, zv[full.index_of(m)], c);
        }
        prob.term_entry(row, t, 0, 0, -1.0);
    }

    auto tie_block = [&](const Polynomial& c, const std::vector<int>& vars) {
        const int nc = (c.degree() + 1) / 2;
        const MonomialBasis bj = monomial_basis(n, d - nc);
        const int blk = prob.add_block(bj.size());
        for (int i = 0; i < bj.size(); ++i)
            for (int j = 0; j <= i; ++j) {
                const int row = prob.add_constraint(0.0);
                prob.term_entry(row, blk, i, j, 1.0);
                for (const auto& [gamma, cv] : c.terms())
                    prob.term_free(
                        row, vars[full.index_of(bj.monomials[i] + bj.monomials[j] + gamma)],
                        -cv);
            }
    };
    tie_block(Polynomial::constant(n, 1.0), yv);
    tie_block(Polynomial::constant(n, 1.0), zv);
    for (const auto& c : sc.omega.constraints) {
        tie_block(c, yv);
        tie_block(c, zv);
    }
    tie_block(sc.h[0], yv);
    tie_block(-sc.h[0], zv);

    SdpSolution sol = solve(prob, settings);
    ConditionalDualResult r;
    switch (sol.status) {
        case SdpStatus::Optimal:
            break;
        case SdpStatus::Unbounded:
            r.status = PrevisionStatus::InfeasibleAssessments;
            return r;
        case SdpStatus::Infeasible:
            r.status = normalized_y_exists(sc.omega, sc.h, d, settings)
                           ? PrevisionStatus::Unbounded
                           : PrevisionStatus::ConditioningOnNullEvent;
            return r;
        default:
            r.status = PrevisionStatus::Inconclusive;
            return r;
    }
    r.status = PrevisionStatus::Value;
    r.value = sol.objective;
    auto read_moments = [&](const std::vector<int>& vars) {
        MomentVector y = MomentVector::zero(n, d);
        if (!sc.scale.active) {
            for (int k = 0; k < full.size(); ++k) y.y[k] = sol.free_values[vars[k]];
        } else {
            for (int k = 0; k < full.size(); ++k) {
                const int deg = full.monomials[k].degree();
                double v = 0.0, binom = 1.0;
                for (int i = 0; i <= deg; ++i) {
                    v += binom * std::pow(sc.scale.a, deg - i) * std::pow(sc.scale.w, i) *
                         sol.free_values[vars[i]];
                    binom = binom * (deg - i) / (i + 1.0);
                }
                y.y[k] = v;
            }
        }
        return y;
    };
    r.point.y = read_moments(yv);
    r.point.z = read_moments(zv);
    return r;
}

PrevisionResult weighted_lower_prevision(double a, double b,
                                         const std::vector<PiecewisePolynomial>& gambles,
                                         const PiecewisePolynomial& f,
                                         const PiecewisePolynomial& weight, int d,
                                         const SdpSettings& settings) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("weighted prevision needs a compact interval domain");
    double wmax = 0.0, wmin = 0.0;
    for (int k = 0; k <= 256; ++k) {
        const double x = a + (b - a) * k / 256.0;
        const double v = weight.eval(x);
        wmax = std::max(wmax, std::fabs(v));
        wmin = std::min(wmin, v);
    }
    if (wmin < -1e-9 * (1.0 + wmax))
        throw std::invalid_argument("weighted prevision: weight is negative on the domain");
    if (wmax <= 0.0)
        throw std::invalid_argument("weighted prevision: weight vanishes on the domain");

    std::vector<PiecewisePolynomial> all = gambles;
    all.push_back(f);
    all.push_back(weight);
    std::vector<Region> regions = partition(a, b, all);
    std::vector<detail::RegionGroup> groups;
    for (const auto& reg : regions) {
        const double mid = 0.5 * (reg.lower + reg.upper);
        detail::RegionGroup g;
        g.lo = reg.lower;
        g.hi = reg.upper;
        const Polynomial& wr = weight.pieces[weight.piece_index(mid)];
        g.target = f.pieces[f.piece_index(mid)] * wr;
        g.l0_coef = wr;
        for (const auto& gamble : gambles)
            g.gambles.push_back(gamble.pieces[gamble.piece_index(mid)]);
        groups.push_back(std::move(g));
    }
    return detail::solve_region_program(a, b, groups, gambles.size(), d, settings);
}

PrevisionResult weighted_lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                         const PiecewisePolynomial& weight,
                                         const SdpSettings& settings) {
    auto iv = detail::interval_bounds(a.omega);
    if (!iv)
        throw std::invalid_argument(
            "weighted prevision needs an interval domain in the assessment set");
    std::vector<PiecewisePolynomial> G;
    for (const auto& g : a.gambles) G.push_back(PiecewisePolynomial::from_polynomial(g));
    return weighted_lower_prevision(iv->first, iv->second, G,
                                    PiecewisePolynomial::from_polynomial(f), weight,
                                    a.degree, settings);
}

PrevisionResult pw_conditional_lower_prevision(double a, double b,
                                               const std::vector<PiecewisePolynomial>& gambles,
                                               const PiecewisePolynomial& f, double a_lo,
                                               double a_hi, int d,
                                               const SdpSettings& settings) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("conditioning needs a compact interval domain");
    const double lo = std::max(a, a_lo), hi = std::min(b, a_hi);
    PrevisionResult r;
    if (!(lo < hi)) {
        r.status = PrevisionStatus::ConditioningOnNullEvent;
        return r;
    }
    std::vector<PiecewisePolynomial> all = gambles;
    all.push_back(f);
    std::vector<Region> regions = partition(a, b, all, {lo, hi});
    std::vector<detail::RegionGroup> groups;
    bool has_event_region = false;
    for (const auto& reg : regions) {
        const double mid = 0.5 * (reg.lower + reg.upper);
        const bool in_A = (mid >= lo && mid <= hi);
        detail::RegionGroup g;
        g.lo = reg.lower;
        g.hi = reg.upper;
        if (in_A) {
            has_event_region = true;
            g.target = f.pieces[f.piece_index(mid)];
            g.l0_coef = Polynomial::constant(1, 1.0);
        } else {
            g.target = Polynomial(1);
        }
        for (const auto& gamble : gambles)
            g.gambles.push_back(gamble.pieces[gamble.piece_index(mid)]);
        groups.push_back(std::move(g));
    }
    if (!has_event_region) {
        r.status = PrevisionStatus::ConditioningOnNullEvent;
        return r;
    }
    return detail::solve_region_program(a, b, groups, gambles.size(), d, settings);
}

PrevisionResult pw_conditional_upper_prevision(double a, double b,
                                               const std::vector<PiecewisePolynomial>& gambles,
                                               const PiecewisePolynomial& f, double a_lo,
                                               double a_hi, int d,
                                               const SdpSettings& settings) {
    PrevisionResult r =
        pw_conditional_lower_prevision(a, b, gambles, -f, a_lo, a_hi, d, settings);
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

}  // namespace sosg
