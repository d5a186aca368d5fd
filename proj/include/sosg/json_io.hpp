#pragma once

// JSON forms of the domain types, used by the CLI and for certificate
// round-trips. Parsing rejects malformed input with invalid_argument.

#include <json.hpp>

#include "sosg/piecewise.hpp"
#include "sosg/prevision.hpp"
#include "sosg/updating.hpp"

namespace sosg {

using json = nlohmann::json;

// {"n": <int>, "terms": [{"exps": [<int>,...], "coef": <float>}, ...]}
json poly_to_json(const Polynomial& p);
Polynomial poly_from_json(const json& j);

// {"constraints": [poly...]} with an optional "n" for constraint-free sets
json omega_to_json(const SemiAlgebraicSet& s);
SemiAlgebraicSet omega_from_json(const json& j, int fallback_n = 0);

// {"omega": {...}, "gambles": [poly...], "degree": d}
json assessments_to_json(const AssessmentSet& a);
AssessmentSet assessments_from_json(const json& j);

// {"breakpoints": [...], "pieces": [poly...]}
json piecewise_to_json(const PiecewisePolynomial& f);
PiecewisePolynomial piecewise_from_json(const json& j);

// {"h": [poly...]}
json event_to_json(const Event& e);
Event event_from_json(const json& j);

// {"d": ..., "Q": [[...]]}; the variable count is recovered from the side
json gram_to_json(const GramRepresentation& g);
GramRepresentation gram_from_json(const json& j);

// {"sigma0": gram, "sigmas": [gram...]}
json certificate_to_json(const XiCertificate& c);
XiCertificate certificate_from_json(const json& j);

// {"n": ..., "d": ..., "y": [...]}
json moments_to_json(const MomentVector& y);
MomentVector moments_from_json(const json& j);

const char* status_name(PrevisionStatus s);
json prevision_result_to_json(const PrevisionResult& r);
json conditional_result_to_json(const ConditionalResult& r);

}  // namespace sosg
