// Command-line frontend: every operation on file inputs, human-readable
// summaries on stdout plus machine-readable CSV/JSON. Exit codes: 0 success,
// 1 usage, 2 solver failure, 3 data validation; errors also go to stderr as
// one JSON object per failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sosg/json_io.hpp"
#include "sosg/optionlab.hpp"
#include "sosg/oracle.hpp"

namespace {

using namespace sosg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitData = 3;

struct CliError {
    int code;
    std::string kind;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message) {
    throw CliError{code, kind, message};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(kExitData, "data", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        fail(kExitData, "data", path + ": " + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    if (std::string(buf) == "-0.000000") return "0.000000";
    return buf;
}

// A gamble file may hold a polynomial or a piecewise polynomial.
struct GambleFile {
    std::optional<Polynomial> poly;
    std::optional<PiecewisePolynomial> pw;
};

GambleFile read_gamble(const std::string& path) {
    json j = read_json_file(path);
    GambleFile g;
    if (j.contains("breakpoints"))
        g.pw = piecewise_from_json(j);
    else
        g.poly = poly_from_json(j);
    return g;
}

std::vector<Polynomial> read_gamble_list(const std::string& path) {
    json j = read_json_file(path);
    std::vector<Polynomial> out;
    const json& arr = j.is_array() ? j : j.at("gambles");
    for (const auto& g : arr) out.push_back(poly_from_json(g));
    return out;
}

SemiAlgebraicSet read_omega(const std::string& path, int fallback_n) {
    return omega_from_json(read_json_file(path), fallback_n);
}

int min_degree_for(const Polynomial& p) { return std::max(1, (p.degree() + 1) / 2); }

std::vector<PiecewisePolynomial> to_piecewise(const std::vector<Polynomial>& gs) {
    std::vector<PiecewisePolynomial> out;
    for (const auto& g : gs) out.push_back(PiecewisePolynomial::from_polynomial(g));
    return out;
}

int run_sos_check(const std::string& file, int d) {
    Polynomial p = poly_from_json(read_json_file(file));
    if (d <= 0) d = min_degree_for(p);
    SosDecomposition r = sos_decompose(p, d);
    switch (r.outcome) {
        case CertOutcome::Certified:
            std::cout << "SOS\n" << json({{"gram", gram_to_json(*r.gram)}}).dump(2) << "\n";
            return kExitOk;
        case CertOutcome::NotCertified:
            std::cout << "NOT-SOS\n";
            return kExitOk;
        default:
            std::cout << "INCONCLUSIVE\n";
            fail(kExitSolver, "solver", "sos membership test did not converge");
    }
}

int run_xi_check(const std::string& file, const std::string& omega_path, int d) {
    Polynomial p = poly_from_json(read_json_file(file));
    SemiAlgebraicSet omega = read_omega(omega_path, p.var_count());
    if (d <= 0) d = std::max(min_degree_for(p), omega.max_half_degree());
    XiMembership r = xi_certificate(p, omega, d);
    switch (r.outcome) {
        case CertOutcome::Certified:
            std::cout << "IN-XI\n" << certificate_to_json(*r.certificate).dump(2) << "\n";
            return kExitOk;
        case CertOutcome::NotCertified:
            std::cout << "NOT-IN-XI\n";
            return kExitOk;
        default:
            std::cout << "INCONCLUSIVE\n";
            fail(kExitSolver, "solver", "membership test did not converge");
    }
}

int report_prevision(const PrevisionResult& r, std::optional<double> oracle_value) {
    std::cout << "status: " << status_name(r.status) << "\n";
    if (r.status == PrevisionStatus::Value) {
        std::cout << "value: " << fmt(r.value) << "\n";
        std::cout << prevision_result_to_json(r).dump(2) << "\n";
        if (oracle_value) {
            std::cout << "oracle: " << fmt(*oracle_value) << "\n";
            std::cout << "gap: " << fmt(*oracle_value - r.value) << "\n";
        }
        return kExitOk;
    }
    if (r.status == PrevisionStatus::Inconclusive)
        fail(kExitSolver, "solver", "prevision solve did not converge");
    return kExitOk;
}

int run_prevision(const std::string& file, const std::string& omega_path,
                  const std::string& gambles_path, int d, bool upper, bool dual,
                  int oracle_n) {
    GambleFile f = read_gamble(file);
    std::vector<Polynomial> gambles =
        gambles_path.empty() ? std::vector<Polynomial>{} : read_gamble_list(gambles_path);

    if (f.pw) {
        SemiAlgebraicSet omega = read_omega(omega_path, 1);
        auto iv = detail::interval_bounds(omega);
        if (!iv) fail(kExitData, "data", "piecewise previsions need an interval domain");
        if (d <= 0) d = std::max(1, (f.pw->max_degree() + 1) / 2);
        if (dual) fail(kExitData, "data", "--dual applies to polynomial gambles only");
        auto G = to_piecewise(gambles);
        PrevisionResult r = upper
                                ? pw_upper_prevision(iv->first, iv->second, G, *f.pw, d)
                                : pw_lower_prevision(iv->first, iv->second, G, *f.pw, d);
        std::optional<double> oracle_value;
        if (oracle_n > 0) {
            LpResult o = upper
                             ? lp_upper_prevision(iv->first, iv->second, G, *f.pw, oracle_n)
                             : lp_lower_prevision(iv->first, iv->second, G, *f.pw, oracle_n);
            if (o.status == PrevisionStatus::Value) oracle_value = o.value;
        }
        return report_prevision(r, oracle_value);
    }

    AssessmentSet a;
    a.omega = read_omega(omega_path, f.poly->var_count());
    a.gambles = gambles;
    a.degree = d > 0 ? d : min_degree_for(*f.poly);
    for (const auto& g : gambles)
        a.degree = std::max(a.degree, min_degree_for(g));
    a.degree = std::max(a.degree, a.omega.max_half_degree());

    if (dual) {
        DualPrevisionResult r = dual_lower_prevision(a, upper ? -*f.poly : *f.poly);
        std::cout << "status: " << status_name(r.status) << "\n";
        if (r.status == PrevisionStatus::Value) {
            std::cout << "value: " << fmt(upper ? -r.value : r.value) << "\n";
            std::cout << json({{"moments", moments_to_json(r.y)}}).dump(2) << "\n";
            return kExitOk;
        }
        if (r.status == PrevisionStatus::Inconclusive)
            fail(kExitSolver, "solver", "dual prevision solve did not converge");
        return kExitOk;
    }

    PrevisionResult r = upper ? upper_prevision(a, *f.poly) : lower_prevision(a, *f.poly);
    std::optional<double> oracle_value;
    if (oracle_n > 0) {
        auto iv = detail::interval_bounds(a.omega);
        if (!iv) fail(kExitData, "data", "--oracle needs an interval domain");
        auto G = to_piecewise(gambles);
        PiecewisePolynomial fp = PiecewisePolynomial::from_polynomial(*f.poly);
        LpResult o = upper ? lp_upper_prevision(iv->first, iv->second, G, fp, oracle_n)
                           : lp_lower_prevision(iv->first, iv->second, G, fp, oracle_n);
        if (o.status == PrevisionStatus::Value) oracle_value = o.value;
    }
    return report_prevision(r, oracle_value);
}

int run_asl(const std::string& omega_path, const std::string& gambles_path, int d) {
    std::vector<Polynomial> gambles = read_gamble_list(gambles_path);
    if (gambles.empty()) {
        std::cout << "Avoids\nlambda0: " << fmt(0.0) << "\n";
        return kExitOk;
    }
    AssessmentSet a;
    a.omega = read_omega(omega_path, gambles.front().var_count());
    a.gambles = gambles;
    a.degree = d;
    if (a.degree <= 0) {
        a.degree = a.omega.max_half_degree();
        for (const auto& g : gambles) a.degree = std::max(a.degree, min_degree_for(g));
    }
    AslResult r = avoids_sure_loss(a);
    switch (r.outcome) {
        case AslResult::Outcome::Avoids:
            std::cout << "Avoids\n";
            break;
        case AslResult::Outcome::SureLoss:
            std::cout << "SureLoss\n";
            break;
        default:
            std::cout << "Inconclusive\n";
            fail(kExitSolver, "solver", "avoiding-sure-loss check did not converge");
    }
    std::cout << "lambda0: " << fmt(r.lambda0) << "\n";
    return kExitOk;
}

int run_condition(const std::string& file, const std::string& omega_path,
                  const std::string& gambles_path, const std::string& event_path, int d,
                  bool dual) {
    Polynomial f = poly_from_json(read_json_file(file));
    Event ev = event_from_json(read_json_file(event_path));
    AssessmentSet a;
    a.omega = read_omega(omega_path, f.var_count());
    a.gambles =
        gambles_path.empty() ? std::vector<Polynomial>{} : read_gamble_list(gambles_path);
    a.degree = d > 0 ? d : min_degree_for(f);

    if (dual) {
        ConditionalDualResult r = conditional_dual(a, ev, f);
        std::cout << "status: " << status_name(r.status) << "\n";
        if (r.status == PrevisionStatus::Value) {
            std::cout << "value: " << fmt(r.value) << "\n";
            std::cout << json({{"y", moments_to_json(r.point.y)},
                               {"z", moments_to_json(r.point.z)}})
                             .dump(2)
                      << "\n";
        } else if (r.status == PrevisionStatus::Inconclusive) {
            fail(kExitSolver, "solver", "conditional dual solve did not converge");
        }
        return kExitOk;
    }
    ConditionalResult r = ev.single() ? conditional_lower_prevision(a, ev, f)
                                      : multi_constraint_conditional(a, ev, f);
    std::cout << "status: " << status_name(r.status) << "\n";
    if (r.status == PrevisionStatus::Value) {
        std::cout << "value: " << fmt(r.value) << "\n";
        std::cout << conditional_result_to_json(r).dump(2) << "\n";
    } else if (r.status == PrevisionStatus::Inconclusive) {
        fail(kExitSolver, "solver", "conditional solve did not converge");
    }
    return kExitOk;
}

int run_sweep(const std::string& file, const std::string& omega_path,
              const std::string& gambles_path, const std::string& degrees) {
    Polynomial f = poly_from_json(read_json_file(file));
    AssessmentSet a;
    a.omega = read_omega(omega_path, f.var_count());
    a.gambles =
        gambles_path.empty() ? std::vector<Polynomial>{} : read_gamble_list(gambles_path);

    const auto dots = degrees.find("..");
    if (dots == std::string::npos)
        fail(kExitUsage, "usage", "--degrees expects a range like 2..4");
    int lo = 0, hi = 0;
    try {
        lo = std::stoi(degrees.substr(0, dots));
        hi = std::stoi(degrees.substr(dots + 2));
    } catch (...) {
        fail(kExitUsage, "usage", "--degrees expects a range like 2..4");
    }
    if (lo < 1 || hi < lo) fail(kExitUsage, "usage", "--degrees range is empty");
    std::vector<int> ds;
    for (int v = lo; v <= hi; ++v) ds.push_back(v);
    auto sweep = degree_sweep(a, f, ds);
    std::cout << "d,value,status\n";
    for (const auto& [dv, r] : sweep) {
        std::cout << dv << ","
                  << (r.status == PrevisionStatus::Value ? fmt(r.value) : "nan") << ","
                  << status_name(r.status) << "\n";
    }
    return kExitOk;
}

int run_options(const std::string& csv_path, const std::string& domain,
                const std::string& cgrid, double given, const std::string& weight_path,
                int oracle_n, int d) {
    OptionChain chain;
    try {
        chain = load_option_chain_file(csv_path);
    } catch (const std::invalid_argument& e) {
        fail(kExitData, "data", e.what());
    }
    double s_min = 2000.0, s_max = 3200.0;
    if (!domain.empty()) {
        if (std::sscanf(domain.c_str(), "%lf,%lf", &s_min, &s_max) != 2)
            fail(kExitUsage, "usage", "--domain expects a,b");
    }
    double c_lo = 2400.0, c_hi = 2800.0, c_step = 10.0;
    if (!cgrid.empty()) {
        if (std::sscanf(cgrid.c_str(), "%lf:%lf:%lf", &c_lo, &c_hi, &c_step) != 3)
            fail(kExitUsage, "usage", "--cgrid expects lo:hi:step");
    }
    std::vector<double> cs = threshold_grid(c_lo, c_hi, c_step);

    ProbabilityCurve curve = probability_curve(chain, s_min, s_max, cs, d);
    std::optional<ProbabilityCurve> updated;
    if (std::isfinite(given))
        updated = conditioned_curve(chain, s_min, s_max, given, cs, d);
    std::optional<ProbabilityCurve> weighted;
    if (!weight_path.empty()) {
        PiecewisePolynomial W = piecewise_from_json(read_json_file(weight_path));
        weighted = weighted_curve(chain, s_min, s_max, W, cs, d);
    }
    if (oracle_n > 0) {
        ProbabilityCurve ref = oracle_curve(chain, s_min, s_max, cs, oracle_n);
        double gap = 0.0;
        for (size_t i = 0; i < cs.size(); ++i) {
            if (curve.points[i].lower_status == PrevisionStatus::Value &&
                ref.points[i].lower_status == PrevisionStatus::Value)
                gap = std::max(gap, std::fabs(curve.points[i].lower - ref.points[i].lower));
            if (curve.points[i].upper_status == PrevisionStatus::Value &&
                ref.points[i].upper_status == PrevisionStatus::Value)
                gap = std::max(gap, std::fabs(curve.points[i].upper - ref.points[i].upper));
        }
        std::cerr << "oracle max gap: " << fmt(gap) << "\n";
    }

    auto cell = [&](PrevisionStatus st, double v) {
        return st == PrevisionStatus::Value ? fmt(v) : std::string("nan");
    };
    std::cout << "c,lower,upper";
    if (updated) std::cout << ",updated_lower,updated_upper";
    if (weighted) std::cout << ",weighted_lower,weighted_upper";
    std::cout << "\n";
    for (size_t i = 0; i < cs.size(); ++i) {
        const auto& p = curve.points[i];
        std::cout << fmt(p.c) << "," << cell(p.lower_status, p.lower) << ","
                  << cell(p.upper_status, p.upper);
        if (updated) {
            const auto& u = updated->points[i];
            std::cout << "," << cell(u.lower_status, u.lower) << ","
                      << cell(u.upper_status, u.upper);
        }
        if (weighted) {
            const auto& u = weighted->points[i];
            std::cout << "," << cell(u.lower_status, u.lower) << ","
                      << cell(u.upper_status, u.upper);
        }
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounded-rationality previsions of polynomial gambles via "
                 "sum-of-squares certificates"};
    app.require_subcommand(1);
    int seed = 0;
    app.add_option("--seed", seed,
                   "seed for test-data generators (inference is deterministic and "
                   "ignores it)");

    std::string file, omega_path, gambles_path, event_path, degrees;
    std::string domain, cgrid, weight_path;
    int d = 0, oracle_n = 0;
    bool upper = false, dual = false;
    double given = std::numeric_limits<double>::quiet_NaN();

    auto* sos = app.add_subcommand("sos-check", "test SOS membership of a polynomial");
    sos->add_option("file", file)->required();
    sos->add_option("-d,--degree", d, "relaxation half-degree");

    auto* xi = app.add_subcommand("xi-check", "test certified nonnegativity on a domain");
    xi->add_option("file", file)->required();
    xi->add_option("--omega", omega_path)->required();
    xi->add_option("-d,--degree", d);

    auto* prev = app.add_subcommand("prevision", "lower/upper prevision of a gamble");
    prev->add_option("file", file)->required();
    prev->add_option("--omega", omega_path)->required();
    prev->add_option("--gambles", gambles_path);
    prev->add_option("-d,--degree", d);
    prev->add_flag("--upper", upper);
    prev->add_flag("--dual", dual);
    prev->add_option("--oracle", oracle_n, "grid size for the LP cross-check");

    auto* asl = app.add_subcommand("asl", "avoiding-sure-loss check");
    asl->add_option("--gambles", gambles_path)->required();
    asl->add_option("--omega", omega_path)->required();
    asl->add_option("-d,--degree", d);

    auto* cond = app.add_subcommand("condition", "conditional prevision given an event");
    cond->add_option("file", file)->required();
    cond->add_option("--omega", omega_path)->required();
    cond->add_option("--gambles", gambles_path);
    cond->add_option("--given", event_path, "event JSON file")->required();
    cond->add_option("-d,--degree", d);
    cond->add_flag("--dual", dual);

    auto* sweep = app.add_subcommand("sweep", "prevision across relaxation degrees");
    sweep->add_option("file", file)->required();
    sweep->add_option("--omega", omega_path)->required();
    sweep->add_option("--gambles", gambles_path);
    sweep->add_option("--degrees", degrees, "range like 2..4")->required();

    auto* opt = app.add_subcommand("options", "option-chain probability curves");
    opt->add_option("chain", file)->required();
    opt->add_option("--domain", domain, "a,b (default 2000,3200)");
    opt->add_option("--cgrid", cgrid, "lo:hi:step (default 2400:2800:10)");
    opt->add_option("--given", given, "condition on S_T >= s0");
    opt->add_option("--weight", weight_path, "piecewise weight JSON");
    opt->add_option("--oracle", oracle_n, "grid size for the LP cross-check");
    opt->add_option("-d,--degree", d);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << nlohmann::json({{"kind", "usage"}, {"error", e.what()}}).dump() << "\n";
        return kExitUsage;
    }

    try {
        if (*sos) return run_sos_check(file, d);
        if (*xi) return run_xi_check(file, omega_path, d);
        if (*prev) return run_prevision(file, omega_path, gambles_path, d, upper, dual, oracle_n);
        if (*asl) return run_asl(omega_path, gambles_path, d);
        if (*cond) return run_condition(file, omega_path, gambles_path, event_path, d, dual);
        if (*sweep) return run_sweep(file, omega_path, gambles_path, degrees);
        if (*opt) return run_options(file, domain, cgrid, given, weight_path, oracle_n,
                                     d > 0 ? d : 2);
    } catch (const CliError& e) {
        std::cerr << nlohmann::json({{"kind", e.kind}, {"error", e.message}}).dump() << "\n";
        return e.code;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json({{"kind", "data"}, {"error", e.what()}}).dump() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json({{"kind", "solver"}, {"error", e.what()}}).dump() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
