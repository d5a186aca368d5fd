#include "sosg/optionlab.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sosg {

OptionChain load_option_chain(const std::string& csv_text, double discount) {
    if (!(discount > 0.0)) throw std::invalid_argument("option chain: discount must be > 0");
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("option chain: empty file");
    // tolerate a UTF-8 BOM and trailing carriage returns
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line = line.substr(3);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "strike,bid,ask")
        throw std::invalid_argument("option chain: expected header 'strike,bid,ask'");
    OptionChain chain;
    chain.discount = discount;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double v[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(row, cell, ','))
                throw std::invalid_argument("option chain: malformed row " +
                                            std::to_string(lineno));
            try {
                size_t used = 0;
                v[k] = std::stod(cell, &used);
                while (used < cell.size() && cell[used] == ' ') ++used;
                if (used != cell.size()) throw std::invalid_argument("");
            } catch (...) {
                throw std::invalid_argument("option chain: malformed number in row " +
                                            std::to_string(lineno));
            }
        }
        OptionChainRow r{v[0], v[1] * discount, v[2] * discount};
        if (r.bid < 0.0 || r.bid > r.ask)
            throw std::invalid_argument("option chain: need 0 <= bid <= ask in row " +
                                        std::to_string(lineno));
        if (!chain.rows.empty() && !(r.strike > chain.rows.back().strike))
            throw std::invalid_argument("option chain: strikes must be strictly increasing");
        chain.rows.push_back(r);
    }
    if (chain.rows.empty()) throw std::invalid_argument("option chain: no data rows");
    return chain;
}

OptionChain load_option_chain_file(const std::string& path, double discount) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("option chain: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_option_chain(buf.str(), discount);
}

std::vector<PiecewisePolynomial> assessments_from_chain(const OptionChain& chain) {
    std::vector<PiecewisePolynomial> G;
    for (const auto& r : chain.rows) {
        PiecewisePolynomial payoff = call_payoff(r.strike);
        G.push_back(payoff - PiecewisePolynomial::constant(r.bid));
        G.push_back(PiecewisePolynomial::constant(r.ask) - payoff);
    }
    return G;
}

bool ProbabilityCurve::all_values() const {
    for (const auto& p : points)
        if (p.lower_status != PrevisionStatus::Value ||
            p.upper_status != PrevisionStatus::Value)
            return false;
    return true;
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo <= hi)) throw std::invalid_argument("bad threshold grid");
    std::vector<double> c;
    for (double x = lo; x <= hi + 1e-9 * step; x += step) c.push_back(x);
    return c;
}

namespace {

void validate_domain(const OptionChain& chain, double s_min, double s_max) {
    if (!(s_min < s_max)) throw std::invalid_argument("option study: need s_min < s_max");
    if (chain.rows.front().strike < s_min || chain.rows.back().strike > s_max)
        throw std::invalid_argument("option study: domain must cover every strike");
}

// Curve points are independent solves; failures are recorded per point
// rather than aborting the sweep (and never thrown across the parallel
// region).
template <typename Solver>
ProbabilityCurve run_curve(const std::vector<double>& c_grid, Solver&& solve_point) {
    ProbabilityCurve curve;
    curve.points.resize(c_grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < c_grid.size(); ++i) {
        try {
            curve.points[i] = solve_point(c_grid[i]);
        } catch (const std::exception&) {
            curve.points[i] = CurvePoint{c_grid[i], PrevisionStatus::Inconclusive,
                                         PrevisionStatus::Inconclusive, 0.0, 0.0};
        }
    }
    return curve;
}

}  // namespace

ProbabilityCurve probability_curve(const OptionChain& chain, double s_min, double s_max,
                                   const std::vector<double>& c_grid, int d,
                                   const SdpSettings& settings) {
    validate_domain(chain, s_min, s_max);
    const std::vector<PiecewisePolynomial> G = assessments_from_chain(chain);
    return run_curve(c_grid, [&](double c) {
        CurvePoint p;
        p.c = c;
        PiecewisePolynomial f = indicator_at_least(c);
        PrevisionResult lo = pw_lower_prevision(s_min, s_max, G, f, d, settings);
        PrevisionResult hi = pw_upper_prevision(s_min, s_max, G, f, d, settings);
        p.lower_status = lo.status;
        p.upper_status = hi.status;
        if (lo.status == PrevisionStatus::Value) p.lower = lo.value;
        if (hi.status == PrevisionStatus::Value) p.upper = hi.value;
        return p;
    });
}

AslResult arbitrage_check(const OptionChain& chain, double s_min, double s_max, int d,
                          const SdpSettings& settings) {
    validate_domain(chain, s_min, s_max);
    return pw_avoids_sure_loss(s_min, s_max, assessments_from_chain(chain), d, settings);
}

ProbabilityCurve conditioned_curve(const OptionChain& chain, double s_min, double s_max,
                                   double s0, const std::vector<double>& c_grid, int d,
                                   const SdpSettings& settings) {
    validate_domain(chain, s_min, s_max);
    const std::vector<PiecewisePolynomial> G = assessments_from_chain(chain);
    return run_curve(c_grid, [&](double c) {
        CurvePoint p;
        p.c = c;
        PiecewisePolynomial f = indicator_at_least(c);
        PrevisionResult lo =
            pw_conditional_lower_prevision(s_min, s_max, G, f, s0, s_max, d, settings);
        PrevisionResult hi =
            pw_conditional_upper_prevision(s_min, s_max, G, f, s0, s_max, d, settings);
        p.lower_status = lo.status;
        p.upper_status = hi.status;
        if (lo.status == PrevisionStatus::Value) p.lower = lo.value;
        if (hi.status == PrevisionStatus::Value) p.upper = hi.value;
        return p;
    });
}

ProbabilityCurve weighted_curve(const OptionChain& chain, double s_min, double s_max,
                                const PiecewisePolynomial& weight,
                                const std::vector<double>& c_grid, int d,
                                const SdpSettings& settings) {
    validate_domain(chain, s_min, s_max);
    // degenerate weights are caller errors, raised before the point sweep
    double wmax = 0.0, wmin = 0.0;
    for (int k = 0; k <= 256; ++k) {
        const double v = weight.eval(s_min + (s_max - s_min) * k / 256.0);
        wmax = std::max(wmax, std::fabs(v));
        wmin = std::min(wmin, v);
    }
    if (wmin < -1e-9 * (1.0 + wmax))
        throw std::invalid_argument("weighted curve: weight is negative on the domain");
    if (wmax <= 0.0)
        throw std::invalid_argument("weighted curve: weight vanishes on the domain");
    const std::vector<PiecewisePolynomial> G = assessments_from_chain(chain);
    return run_curve(c_grid, [&](double c) {
        CurvePoint p;
        p.c = c;
        PiecewisePolynomial f = indicator_at_least(c);
        PrevisionResult lo =
            weighted_lower_prevision(s_min, s_max, G, f, weight, d, settings);
        PrevisionResult hi =
            weighted_lower_prevision(s_min, s_max, G, -f, weight, d, settings);
        p.lower_status = lo.status;
        p.upper_status = hi.status;
        if (lo.status == PrevisionStatus::Value) p.lower = lo.value;
        if (hi.status == PrevisionStatus::Value) p.upper = -hi.value;
        return p;
    });
}

ProbabilityCurve oracle_curve(const OptionChain& chain, double s_min, double s_max,
                              const std::vector<double>& c_grid, int grid_n,
                              const SdpSettings& settings) {
    validate_domain(chain, s_min, s_max);
    const std::vector<PiecewisePolynomial> G = assessments_from_chain(chain);
    return run_curve(c_grid, [&](double c) {
        CurvePoint p;
        p.c = c;
        PiecewisePolynomial f = indicator_at_least(c);
        LpResult lo = lp_lower_prevision(s_min, s_max, G, f, grid_n, settings);
        LpResult hi = lp_upper_prevision(s_min, s_max, G, f, grid_n, settings);
        p.lower_status = lo.status;
        p.upper_status = hi.status;
        if (lo.status == PrevisionStatus::Value) p.lower = lo.value;
        if (hi.status == PrevisionStatus::Value) p.upper = hi.value;
        return p;
    });
}

}  // namespace sosg
