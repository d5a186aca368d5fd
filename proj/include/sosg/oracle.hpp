#pragma once

// Independent ground truth at desk scale: discretize a compact 1-D domain
// and solve the prevision / conditioning problems as linear programs (the
// sdp module with all-scalar blocks). The grid relaxes the for-all-x
// constraint, so these values upper-bound the exact ones; certificate-side
// previsions must come out below them.

#include <vector>

#include "sosg/piecewise.hpp"

namespace sosg {

struct LpResult {
    PrevisionStatus status = PrevisionStatus::Inconclusive;
    double value = 0.0;
    std::vector<double> lambda;  // multiplier witness, one per gamble
    double lambda0 = 0.0;
};

// sup lambda_0 with f(x_k) - lambda_0 - sum_j lambda_j g_j(x_k) >= 0 on a
// uniform grid that also contains every breakpoint exactly; discontinuities
// are sampled from both sides.
LpResult lp_lower_prevision(double a, double b,
                            const std::vector<PiecewisePolynomial>& gambles,
                            const PiecewisePolynomial& f, int grid_n,
                            const SdpSettings& settings = {});

LpResult lp_upper_prevision(double a, double b,
                            const std::vector<PiecewisePolynomial>& gambles,
                            const PiecewisePolynomial& f, int grid_n,
                            const SdpSettings& settings = {});

// Conditional version: the prevision constraint runs over the grid of
// A = [a_lo, a_hi] (intersected with the domain) and the pure-loss
// constraint over the complement grid, with shared multipliers.
LpResult lp_conditional(double a, double b,
                        const std::vector<PiecewisePolynomial>& gambles, double a_lo,
                        double a_hi, const PiecewisePolynomial& f, int grid_n,
                        const SdpSettings& settings = {});

}  // namespace sosg
