#include "sosg/json_io.hpp"

#include <stdexcept>

namespace sosg {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw std::invalid_argument("json: " + what);
}

json require(const json& j, const char* key) {
    if (!j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

}  // namespace

json poly_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& [m, c] : p.terms())
        terms.push_back({{"exps", m.exponents}, {"coef", c}});
    return {{"n", p.var_count()}, {"terms", terms}};
}

Polynomial poly_from_json(const json& j) {
    if (!j.is_object()) bad("polynomial must be an object");
    const int n = require(j, "n").get<int>();
    if (n < 1) bad("polynomial needs n >= 1");
    Polynomial::TermMap terms;
    for (const auto& t : require(j, "terms")) {
        std::vector<int> exps = require(t, "exps").get<std::vector<int>>();
        if (static_cast<int>(exps.size()) != n)
            bad("term exponent list length must equal n");
        for (int e : exps)
            if (e < 0) bad("negative exponent");
        terms[Monomial(std::move(exps))] += require(t, "coef").get<double>();
    }
    return Polynomial::from_terms(n, std::move(terms));
}

json omega_to_json(const SemiAlgebraicSet& s) {
    json cs = json::array();
    for (const auto& c : s.constraints) cs.push_back(poly_to_json(c));
    return {{"n", s.n}, {"constraints", cs}};
}

SemiAlgebraicSet omega_from_json(const json& j, int fallback_n) {
    // an assessment-set file is accepted as a domain source
    if (j.contains("omega")) return omega_from_json(j.at("omega"), fallback_n);
    SemiAlgebraicSet s;
    for (const auto& c : require(j, "constraints")) s.constraints.push_back(poly_from_json(c));
    if (j.contains("n"))
        s.n = j.at("n").get<int>();
    else if (!s.constraints.empty())
        s.n = s.constraints.front().var_count();
    else
        s.n = fallback_n;
    if (s.n < 1) bad("domain needs a variable count (add an 'n' field)");
    for (const auto& c : s.constraints)
        if (c.var_count() != s.n) bad("domain constraints disagree on the variable count");
    return s;
}

json assessments_to_json(const AssessmentSet& a) {
    json gs = json::array();
    for (const auto& g : a.gambles) gs.push_back(poly_to_json(g));
    return {{"omega", omega_to_json(a.omega)}, {"gambles", gs}, {"degree", a.degree}};
}

AssessmentSet assessments_from_json(const json& j) {
    AssessmentSet a;
    for (const auto& g : require(j, "gambles")) a.gambles.push_back(poly_from_json(g));
    const int fallback = a.gambles.empty() ? 0 : a.gambles.front().var_count();
    a.omega = omega_from_json(require(j, "omega"), fallback);
    a.degree = require(j, "degree").get<int>();
    return a;
}

json piecewise_to_json(const PiecewisePolynomial& f) {
    json ps = json::array();
    for (const auto& p : f.pieces) ps.push_back(poly_to_json(p));
    return {{"breakpoints", f.breakpoints}, {"pieces", ps}};
}

PiecewisePolynomial piecewise_from_json(const json& j) {
    PiecewisePolynomial f;
    f.breakpoints = require(j, "breakpoints").get<std::vector<double>>();
    for (size_t i = 1; i < f.breakpoints.size(); ++i)
        if (!(f.breakpoints[i - 1] < f.breakpoints[i]))
            bad("breakpoints must be strictly increasing");
    for (const auto& p : require(j, "pieces")) {
        Polynomial piece = poly_from_json(p);
        if (piece.var_count() != 1) bad("piecewise pieces must be univariate");
        f.pieces.push_back(std::move(piece));
    }
    if (f.pieces.size() != f.breakpoints.size() + 1)
        bad("piecewise needs exactly one piece more than breakpoints");
    return f;
}

json event_to_json(const Event& e) {
    json hs = json::array();
    for (const auto& h : e.h) hs.push_back(poly_to_json(h));
    return {{"h", hs}};
}

Event event_from_json(const json& j) {
    Event e;
    for (const auto& h : require(j, "h")) e.h.push_back(poly_from_json(h));
    if (e.h.empty()) bad("event needs at least one constraint polynomial");
    return e;
}

json gram_to_json(const GramRepresentation& g) {
    const int s = g.basis.size();
    json rows = json::array();
    for (int i = 0; i < s; ++i) {
        json row = json::array();
        for (int k = 0; k < s; ++k) row.push_back(g.Q(i, k));
        rows.push_back(row);
    }
    return {{"d", g.basis.d}, {"Q", rows}};
}

GramRepresentation gram_from_json(const json& j) {
    const int d = require(j, "d").get<int>();
    const json rows = require(j, "Q");
    const int side = static_cast<int>(rows.size());
    if (side < 1) bad("Gram matrix must be nonempty");
    // the variable count is determined by side = C(n+d, d)
    int n = -1;
    for (int cand = 1; cand <= 16; ++cand)
        if (basis_dimension(cand, d) == side) {
            n = cand;
            break;
        }
    if (d == 0 && side == 1) n = 1;
    if (n < 0) bad("Gram side does not match any basis dimension");
    GramRepresentation g;
    g.basis = monomial_basis(n, d);
    g.Q = Mat(side, side);
    for (int i = 0; i < side; ++i) {
        if (static_cast<int>(rows[i].size()) != side) bad("Gram matrix must be square");
        for (int k = 0; k < side; ++k) g.Q(i, k) = rows[i][k].get<double>();
    }
    return g;
}

json certificate_to_json(const XiCertificate& c) {
    json sig = json::array();
    for (const auto& s : c.sigmas) sig.push_back(gram_to_json(s));
    return {{"sigma0", gram_to_json(c.sigma0)}, {"sigmas", sig}};
}

XiCertificate certificate_from_json(const json& j) {
    XiCertificate c;
    c.sigma0 = gram_from_json(require(j, "sigma0"));
    for (const auto& s : require(j, "sigmas")) c.sigmas.push_back(gram_from_json(s));
    return c;
}

json moments_to_json(const MomentVector& y) {
    return {{"n", y.n}, {"d", y.d}, {"y", y.y}};
}

MomentVector moments_from_json(const json& j) {
    MomentVector y;
    y.n = require(j, "n").get<int>();
    y.d = require(j, "d").get<int>();
    y.y = require(j, "y").get<std::vector<double>>();
    if (static_cast<long long>(y.y.size()) != basis_dimension(y.n, 2 * y.d))
        bad("moment vector length must be s_n(2d)");
    return y;
}

const char* status_name(PrevisionStatus s) {
    switch (s) {
        case PrevisionStatus::Value:
            return "Value";
        case PrevisionStatus::Unbounded:
            return "Unbounded";
        case PrevisionStatus::InfeasibleAssessments:
            return "InfeasibleAssessments";
        case PrevisionStatus::ConditioningOnNullEvent:
            return "ConditioningOnNullEvent";
        default:
            return "Inconclusive";
    }
}

json prevision_result_to_json(const PrevisionResult& r) {
    json j = {{"status", status_name(r.status)}};
    if (r.status == PrevisionStatus::Value) {
        j["value"] = r.value;
        j["lambda0"] = r.value;
        j["lambda"] = r.lambda;
        if (r.certificate) j["certificate"] = certificate_to_json(*r.certificate);
        if (!r.region_certificates.empty()) {
            json rc = json::array();
            for (const auto& c : r.region_certificates) rc.push_back(certificate_to_json(c));
            j["region_certificates"] = rc;
        }
    }
    return j;
}

json conditional_result_to_json(const ConditionalResult& r) {
    json j = {{"status", status_name(r.status)}};
    if (r.status == PrevisionStatus::Value) {
        j["value"] = r.value;
        j["lambda0"] = r.value;
        j["lambda"] = r.lambda;
        if (r.xi1) j["xi1"] = certificate_to_json(*r.xi1);
        if (r.xi2) j["xi2"] = certificate_to_json(*r.xi2);
        if (!r.sigma_a.empty()) {
            json sa = json::array();
            for (const auto& g : r.sigma_a) sa.push_back(gram_to_json(g));
            j["sigma_a"] = sa;
        }
        if (r.sigma_b) j["sigma_b"] = gram_to_json(*r.sigma_b);
    }
    return j;
}

}  // namespace sosg
