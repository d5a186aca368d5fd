#pragma once

// One-dimensional piecewise-polynomial gambles (indicators, option payoffs)
// and their previsions via per-region certificate constraints with shared
// multipliers across regions.

#include <vector>

#include "sosg/prevision.hpp"

namespace sosg {

// Breakpoints closer than this are coalesced.
inline constexpr double kBreakpointTol = 1e-9;

struct PiecewisePolynomial {
    std::vector<double> breakpoints;   // strictly increasing, k of them
    std::vector<Polynomial> pieces;    // k+1 univariate polynomials; piece i
                                       // is valid on [b_i, b_{i+1})

    // Right-continuous region selection: the value at a breakpoint comes
    // from the piece starting there.
    double eval(double x) const;
    int piece_index(double x) const;
    int max_degree() const;

    PiecewisePolynomial operator+(const PiecewisePolynomial& o) const;
    PiecewisePolynomial operator-(const PiecewisePolynomial& o) const;
    PiecewisePolynomial operator*(const PiecewisePolynomial& o) const;
    PiecewisePolynomial operator-() const;

    static PiecewisePolynomial from_polynomial(const Polynomial& p);
    static PiecewisePolynomial constant(double c);
};

// max(x - strike, 0)
PiecewisePolynomial call_payoff(double strike);

// I_{[c, infty)}
PiecewisePolynomial indicator_at_least(double c);

struct Region {
    double lower = 0.0;
    double upper = 0.0;
    SemiAlgebraicSet constraints() const { return SemiAlgebraicSet::interval(lower, upper); }
};

// Sorted, deduplicated breakpoints restricted to (a,b); consecutive regions
// cover [a,b]. extra_points are additional mandatory cuts (event boundaries,
// weight kinks).
std::vector<Region> partition(double a, double b,
                              const std::vector<PiecewisePolynomial>& gambles,
                              const std::vector<double>& extra_points = {});

// sup lambda_0 with (f - lambda_0 - sum_j lambda_j g_j) restricted to every
// region lying in that region's Xi cone; lambda shared across regions.
// Region certificates come back in original coordinates, one per region.
PrevisionResult pw_lower_prevision(double a, double b,
                                   const std::vector<PiecewisePolynomial>& gambles,
                                   const PiecewisePolynomial& f, int d,
                                   const SdpSettings& settings = {});

PrevisionResult pw_upper_prevision(double a, double b,
                                   const std::vector<PiecewisePolynomial>& gambles,
                                   const PiecewisePolynomial& f, int d,
                                   const SdpSettings& settings = {});

// Avoiding-sure-loss over piecewise assessments, per-region formulation.
AslResult pw_avoids_sure_loss(double a, double b,
                              const std::vector<PiecewisePolynomial>& gambles, int d,
                              const SdpSettings& settings = {});

namespace detail {

// One constraint group of a region program: on [lo, hi] (original coords),
//   lambda0 * l0_coef + sum_j lambda_j g_j + Xi-cone member = target.
// Groups share lambda across the program; l0_coef absent means the group
// does not involve lambda_0 (conditioning complement groups).
struct RegionGroup {
    double lo = 0.0, hi = 0.0;
    Polynomial target;
    std::optional<Polynomial> l0_coef;
    std::vector<Polynomial> gambles;  // pieces, one per shared multiplier
};

// Solves max lambda_0 (free) over the shared-lambda region program; the
// program is affinely rescaled to [0,1] internally and certificates are
// mapped back. Regions in `groups` order produce region_certificates.
PrevisionResult solve_region_program(double a, double b,
                                     const std::vector<RegionGroup>& groups,
                                     size_t gamble_count, int d,
                                     const SdpSettings& settings);

// Pieces of f restricted to each region of the partition.
std::vector<Polynomial> pieces_on_regions(const PiecewisePolynomial& f,
                                          const std::vector<Region>& regions);

}  // namespace detail

}  // namespace sosg
