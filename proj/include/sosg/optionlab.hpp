#pragma once

// The European-option study as a reusable pipeline: ingest a call-option
// chain, turn each quote into a pair of desirable gambles, and compute
// lower/upper probability curves for {S_T > c}, with conditioning and
// volume-style weighting, validated against the grid-LP oracle.

#include <string>
#include <vector>

#include "sosg/oracle.hpp"
#include "sosg/piecewise.hpp"
#include "sosg/updating.hpp"

namespace sosg {

struct OptionChainRow {
    double strike = 0.0;
    double bid = 0.0;
    double ask = 0.0;
};

struct OptionChain {
    std::vector<OptionChainRow> rows;
    double discount = 1.0;  // multiplies quotes on ingestion
};

// Parses "strike,bid,ask" CSV text. Rejects malformed rows, bid > ask,
// negative bids, and non-increasing strikes.
OptionChain load_option_chain(const std::string& csv_text, double discount = 1.0);
OptionChain load_option_chain_file(const std::string& path, double discount = 1.0);

// Two gambles per row: payoff - bid and ask - payoff.
std::vector<PiecewisePolynomial> assessments_from_chain(const OptionChain& chain);

struct CurvePoint {
    double c = 0.0;
    PrevisionStatus lower_status = PrevisionStatus::Inconclusive;
    PrevisionStatus upper_status = PrevisionStatus::Inconclusive;
    double lower = 0.0;
    double upper = 0.0;
};

struct ProbabilityCurve {
    std::vector<CurvePoint> points;
    bool all_values() const;
};

std::vector<double> threshold_grid(double lo, double hi, double step);

// Lower/upper prevision of I_{[c, inf)} per threshold; points are solved
// independently (and concurrently) with deterministic ordering.
ProbabilityCurve probability_curve(const OptionChain& chain, double s_min, double s_max,
                                   const std::vector<double>& c_grid, int d,
                                   const SdpSettings& settings = {});

// Avoiding-sure-loss over the chain's gambles (per-region formulation).
AslResult arbitrage_check(const OptionChain& chain, double s_min, double s_max, int d,
                          const SdpSettings& settings = {});

// Updated curve given the event S_T >= s0.
ProbabilityCurve conditioned_curve(const OptionChain& chain, double s_min, double s_max,
                                   double s0, const std::vector<double>& c_grid, int d,
                                   const SdpSettings& settings = {});

// Curve under the density-style weighting W (nonnegative on the domain).
ProbabilityCurve weighted_curve(const OptionChain& chain, double s_min, double s_max,
                                const PiecewisePolynomial& weight,
                                const std::vector<double>& c_grid, int d,
                                const SdpSettings& settings = {});

// Grid-LP reference curve for validating the certificate engine.
ProbabilityCurve oracle_curve(const OptionChain& chain, double s_min, double s_max,
                              const std::vector<double>& c_grid, int grid_n,
                              const SdpSettings& settings = {});

}  // namespace sosg
