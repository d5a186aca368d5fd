#pragma once

// Core inference over finite desirability assessments: natural-extension
// membership, lower/upper previsions in primal (certificate) and dual
// (moment) form, bounded avoiding-sure-loss, and degree sweeps.

#include <optional>
#include <utility>
#include <vector>

#include "sosg/cones.hpp"

namespace sosg {

struct AssessmentSet {
    SemiAlgebraicSet omega;           // the domain
    std::vector<Polynomial> gambles;  // the finite set G
    int degree = 1;                   // relaxation degree d

    // Rejects degree bookkeeping violations: d must cover ceil(deg f / 2),
    // every ceil(deg g_j / 2), and every constraint half-degree.
    void validate(const Polynomial* f = nullptr) const;
};

enum class PrevisionStatus {
    Value,
    Unbounded,               // the supremum is +inf
    InfeasibleAssessments,   // no lambda_0 is feasible at this degree
    Inconclusive,            // solver failure, surfaced rather than guessed
    ConditioningOnNullEvent  // only produced by the updating operations
};

struct PrevisionResult {
    PrevisionStatus status = PrevisionStatus::Inconclusive;
    double value = 0.0;          // the optimum lambda_0, when status == Value
    std::vector<double> lambda;  // multipliers, one per gamble in G
    std::optional<XiCertificate> certificate;        // polynomial-domain path
    std::vector<XiCertificate> region_certificates;  // piecewise path, per region
};

enum class Verdict { True, False, Inconclusive };

// Natural-extension membership: f in posi(G u Xi_2d)?
Verdict extends(const AssessmentSet& a, const Polynomial& f, const SdpSettings& settings = {});

// sup lambda_0 s.t. f - lambda_0 - sum_j lambda_j g_j in Xi_2d, lambda_j >= 0.
// auto_rescale maps wide 1-D interval domains to [0,1] internally (results
// and certificates are mapped back).
PrevisionResult lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                const SdpSettings& settings = {}, bool auto_rescale = true);

// Conjugate: upper(f) = -lower(-f), statuses mapped accordingly.
PrevisionResult upper_prevision(const AssessmentSet& a, const Polynomial& f,
                                const SdpSettings& settings = {}, bool auto_rescale = true);

struct AslResult {
    enum class Outcome { Avoids, SureLoss, Inconclusive };
    Outcome outcome = Outcome::Inconclusive;
    double lambda0 = 0.0;        // provably lands on 0 or 1
    std::vector<double> lambda;  // witness multipliers
};

AslResult avoids_sure_loss(const AssessmentSet& a, const SdpSettings& settings = {});

struct DualPrevisionResult {
    PrevisionStatus status = PrevisionStatus::Inconclusive;
    double value = 0.0;
    MomentVector y;
};

// Moment-side program: inf L_y(f) over normalized y with L_y(g_j) >= 0 and
// psd moment/localizing matrices.
DualPrevisionResult dual_lower_prevision(const AssessmentSet& a, const Polynomial& f,
                                         const SdpSettings& settings = {},
                                         bool auto_rescale = true);

// lower_prevision across increasing degrees; values are nondecreasing in d.
std::vector<std::pair<int, PrevisionResult>> degree_sweep(const AssessmentSet& a_template,
                                                          const Polynomial& f,
                                                          const std::vector<int>& degrees,
                                                          const SdpSettings& settings = {});

namespace detail {

// Affine map x = a + w t pulling a wide 1-D interval domain back to [0,1].
struct BoxScale {
    bool active = false;
    double a = 0.0;
    double w = 1.0;
};

std::optional<std::pair<double, double>> interval_bounds(const SemiAlgebraicSet& omega);
// `aggressive` also rescales O(1)-width intervals sitting far from [0,1];
// the moment-side programs need that to keep the y magnitudes tame.
BoxScale pick_scale(const SemiAlgebraicSet& omega, bool auto_rescale,
                    bool aggressive = false);
Polynomial to_unit(const Polynomial& p, const BoxScale& s);
// Gram of sigma(t) rewritten over the x-monomial basis via t = (x - a)/w.
GramRepresentation gram_to_original(const GramRepresentation& g, const BoxScale& s);
XiCertificate certificate_to_original(const XiCertificate& c, const BoxScale& s,
                                      const std::vector<double>& constraint_scales);

}  // namespace detail

}  // namespace sosg
