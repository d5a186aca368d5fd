#pragma once

// Shared helpers for the test suites: deterministic random polynomials and
// random 1-D assessment instances anchored at an interior point so the dual
// side stays feasible (the instances avoid sure loss by construction).

#include <random>
#include <vector>

#include "sosg/prevision.hpp"

namespace sosg::testutil {

inline Polynomial upoly(std::initializer_list<double> coeffs_ascending) {
    Polynomial::TermMap t;
    int k = 0;
    for (double c : coeffs_ascending) t[Monomial({k++})] = c;
    return Polynomial::from_terms(1, std::move(t));
}

inline Polynomial random_upoly(int max_deg, std::mt19937& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    Polynomial::TermMap t;
    for (int k = 0; k <= max_deg; ++k) t[Monomial({k})] = u(rng);
    return Polynomial::from_terms(1, std::move(t));
}

struct Instance1d {
    double a = 0.0, b = 1.0;
    AssessmentSet assess;
    Polynomial f = Polynomial(1);
};

// Compact interval, |G| <= max_gambles built as anchored pairs/singles so a
// point mass at the anchor is always dual feasible, deg <= max_deg.
inline Instance1d random_instance(std::mt19937& rng, int degree, int max_gambles = 4,
                                  int max_deg = 3, double max_width = 8.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance1d inst;
    inst.a = -2.0 + 3.0 * u(rng);
    inst.b = inst.a + 0.5 + (max_width - 0.5) * u(rng);
    inst.assess.omega = SemiAlgebraicSet::interval(inst.a, inst.b);
    inst.assess.degree = degree;
    const double anchor = inst.a + (inst.b - inst.a) * (0.2 + 0.6 * u(rng));
    const int ng = static_cast<int>(u(rng) * (max_gambles + 1));
    std::uniform_int_distribution<int> degd(1, max_deg);
    for (int j = 0; j < ng && static_cast<int>(inst.assess.gambles.size()) < max_gambles;
         ++j) {
        Polynomial p = random_upoly(degd(rng), rng);
        const double shift = p.eval1(anchor);
        Polynomial g = p - Polynomial::constant(1, shift);
        if (u(rng) < 0.5 && static_cast<int>(inst.assess.gambles.size()) + 2 <= max_gambles) {
            inst.assess.gambles.push_back(g);
            inst.assess.gambles.push_back(-g);
        } else {
            // a margin at the anchor keeps the instance free of sure loss
            inst.assess.gambles.push_back(g + Polynomial::constant(1, 0.3 * u(rng)));
        }
    }
    inst.f = random_upoly(std::min(max_deg, 2 * degree - 1), rng, 2.0);
    // normalize f to O(1) sup-norm on the interval so absolute property
    // tolerances are meaningful
    double sup = 0.0;
    for (int k = 0; k <= 100; ++k)
        sup = std::max(sup, std::fabs(inst.f.eval1(inst.a + (inst.b - inst.a) * k / 100.0)));
    if (sup > 1.0) inst.f = inst.f * (1.0 / sup);
    return inst;
}

}  // namespace sosg::testutil
