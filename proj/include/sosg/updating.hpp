#pragma once

// Conditioning the bounded-rationality cone on a polynomial event
// A = {x in Omega : h(x) >= 0}: the primal two-equality program with shared
// multipliers, its y/z moment dual, the conservative multi-constraint
// relaxation, and density-style weighted updating.

#include <optional>

#include "sosg/piecewise.hpp"
#include "sosg/prevision.hpp"

namespace sosg {

struct Event {
    std::vector<Polynomial> h;  // one entry in the single-constraint case

    int half_degree(int i) const { return (h.at(i).degree() + 1) / 2; }
    bool single() const { return h.size() == 1; }
};

struct ConditionalDualPoint {
    MomentVector y;  // normalized: L_y(1) = 1
    MomentVector z;  // unnormalized complement mass
};

struct ConditionalResult {
    PrevisionStatus status = PrevisionStatus::Inconclusive;
    double value = 0.0;
    std::vector<double> lambda;
    // group 1: f - lambda0 - sum lambda_i g_i = sigma10 + sum sigma1j c_j + sum sigma_a_i h_i
    // group 2:            - sum lambda_i g_i = sigma20 + sum sigma2j c_j - sigma_b h
    std::optional<XiCertificate> xi1, xi2;
    std::vector<GramRepresentation> sigma_a;  // one per event constraint
    std::optional<GramRepresentation> sigma_b;  // single-constraint case only
};

// sup lambda_0 over the coupled pair of certificate equalities (the event
// must be single-constraint; sigma_a, sigma_b have degree d - n_h).
ConditionalResult conditional_lower_prevision(const AssessmentSet& a, const Event& event,
                                              const Polynomial& f,
                                              const SdpSettings& settings = {});

struct ConditionalDualResult {
    PrevisionStatus status = PrevisionStatus::Inconclusive;
    double value = 0.0;
    ConditionalDualPoint point;
};

// inf L_y(f) over normalized y and unnormalized z with psd moment and
// localizing matrices on both, h localizing on y, -h localizing on z, and
// the coupling L_y(g_j) + L_z(g_j) >= 0.
ConditionalDualResult conditional_dual(const AssessmentSet& a, const Event& event,
                                       const Polynomial& f,
                                       const SdpSettings& settings = {});

// Eq-(34)-style relaxation for events with several constraints: the first
// equality gains one sigma_a_i h_i per constraint, the second drops all h
// terms. Conservative relative to the single-constraint program.
ConditionalResult multi_constraint_conditional(const AssessmentSet& a, const Event& event,
                                               const Polynomial& f,
                                               const SdpSettings& settings = {});

// sup lambda_0 with (f - lambda_0) W - sum lambda_j g_j in the per-region
// cone; W must be nonnegative on the domain (caller-asserted) and not
// identically zero.
PrevisionResult weighted_lower_prevision(double a, double b,
                                         const std::vector<PiecewisePolynomial>& gambles,
                                         const PiecewisePolynomial& f,
                                         const PiecewisePolynomial& weight, int d,
                                         const SdpSettings& settings = {});

// Assessment-set adapter for polynomial gambles on an interval domain.
PrevisionResult weighted_lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                         const PiecewisePolynomial& weight,
                                         const SdpSettings& settings = {});

// Piecewise conditioning on the interval event A = [a_lo, a_hi] n [a, b]:
// regions inside A constrain f - lambda_0 - sum lambda g, regions outside
// constrain -sum lambda g, multipliers shared. Used by the option pipeline.
PrevisionResult pw_conditional_lower_prevision(double a, double b,
                                               const std::vector<PiecewisePolynomial>& gambles,
                                               const PiecewisePolynomial& f, double a_lo,
                                               double a_hi, int d,
                                               const SdpSettings& settings = {});

PrevisionResult pw_conditional_upper_prevision(double a, double b,
                                               const std::vector<PiecewisePolynomial>& gambles,
                                               const PiecewisePolynomial& f, double a_lo,
                                               double a_hi, int d,
                                               const SdpSettings& settings = {});

}  // namespace sosg
