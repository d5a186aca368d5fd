#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sosg/oracle.hpp"
#include "testutil.hpp"

using namespace sosg;
using testutil::upoly;

namespace {

std::vector<PiecewisePolynomial> markov_gambles(double m) {
    Polynomial g = upoly({-m, 1.0});
    return {PiecewisePolynomial::from_polynomial(g),
            PiecewisePolynomial::from_polynomial(-g)};
}

}  // namespace

TEST_CASE("Markov instance reproduces min(1, m/u) on the grid") {
    LpResult r =
        lp_upper_prevision(0.0, 10.0, markov_gambles(2.0), indicator_at_least(5.0), 4001);
    REQUIRE(r.status == PrevisionStatus::Value);
    CHECK(std::fabs(r.value - 0.4) <= 2e-3);
}

TEST_CASE("pointwise minimum under full ignorance") {
    LpResult r = lp_lower_prevision(
        0.0, 1.0, {}, PiecewisePolynomial::from_polynomial(upoly({0.0, 1.0, -1.0})), 4001);
    REQUIRE(r.status == PrevisionStatus::Value);
    CHECK(std::fabs(r.value - 0.0) <= 1e-6);
}

TEST_CASE("conditioning on the whole domain changes nothing") {
    auto G = markov_gambles(2.0);
    PiecewisePolynomial f = indicator_at_least(5.0);
    LpResult all = lp_conditional(0.0, 10.0, G, 0.0, 10.0, f, 501);
    LpResult plain = lp_lower_prevision(0.0, 10.0, G, f, 501);
    REQUIRE(all.status == PrevisionStatus::Value);
    REQUIRE(plain.status == PrevisionStatus::Value);
    CHECK(std::fabs(all.value - plain.value) <= 1e-9);
}

TEST_CASE("conditional minimum over the event interval") {
    LpResult r = lp_conditional(0.0, 10.0, {}, 5.0, 10.0,
                                PiecewisePolynomial::from_polynomial(upoly({0.0, 1.0})), 4001);
    REQUIRE(r.status == PrevisionStatus::Value);
    CHECK(std::fabs(r.value - 5.0) <= 2e-3);
}

TEST_CASE("grid refinement only tightens the value") {
    auto G = markov_gambles(2.0);
    PiecewisePolynomial f = indicator_at_least(5.0);
    LpResult coarse = lp_lower_prevision(0.0, 10.0, G, f, 501);
    LpResult fine = lp_lower_prevision(0.0, 10.0, G, f, 1001);  // 2n-1 nests
    REQUIRE(coarse.status == PrevisionStatus::Value);
    REQUIRE(fine.status == PrevisionStatus::Value);
    CHECK(fine.value <= coarse.value + 1e-9);
}

TEST_CASE("grid values are stable under refinement") {
    std::mt19937 rng(2718);
    for (int rep = 0; rep < 3; ++rep) {
        auto inst = testutil::random_instance(rng, 2);
        std::vector<PiecewisePolynomial> G;
        for (const auto& g : inst.assess.gambles)
            G.push_back(PiecewisePolynomial::from_polynomial(g));
        PiecewisePolynomial f = PiecewisePolynomial::from_polynomial(inst.f);
        LpResult v1 = lp_lower_prevision(inst.a, inst.b, G, f, 4001);
        LpResult v2 = lp_lower_prevision(inst.a, inst.b, G, f, 8001);
        REQUIRE(v1.status == PrevisionStatus::Value);
        REQUIRE(v2.status == PrevisionStatus::Value);
        CHECK(std::fabs(v1.value - v2.value) <= 5e-4);
    }
}

TEST_CASE("a uniformly negative desirable gamble blows the program up") {
    std::vector<PiecewisePolynomial> G = {
        PiecewisePolynomial::from_polynomial(upoly({-1.0, -1.0}))};  // -1 - x < 0 on [0,10]
    LpResult r = lp_lower_prevision(0.0, 10.0, G,
                                    PiecewisePolynomial::constant(0.0), 501);
    CHECK(r.status == PrevisionStatus::Unbounded);
}

TEST_CASE("the multiplier witness is dual feasible") {
    auto G = markov_gambles(2.0);
    PiecewisePolynomial f = indicator_at_least(5.0);
    LpResult r = lp_lower_prevision(0.0, 10.0, G, f, 1001);
    REQUIRE(r.status == PrevisionStatus::Value);
    REQUIRE(r.lambda.size() == 2);
    CHECK(r.lambda0 == doctest::Approx(r.value).epsilon(1e-6));
    // f - lambda0 - sum lambda_j g_j >= 0 on the grid (up to lp tolerance)
    for (int k = 0; k <= 1000; ++k) {
        const double x = 10.0 * k / 1000.0;
        double v = f.eval(x) - r.lambda0;
        for (size_t j = 0; j < G.size(); ++j) v -= r.lambda[j] * G[j].eval(x);
        CHECK(v >= -1e-6);
    }
}

TEST_CASE("single-strike study sanity: the quote pair bounds the indicator") {
    // G from the 2490 bid/ask pair only
    PiecewisePolynomial payoff = call_payoff(2490.0);
    std::vector<PiecewisePolynomial> G = {
        payoff - PiecewisePolynomial::constant(53.3),
        PiecewisePolynomial::constant(53.8) - payoff};
    LpResult lo = lp_lower_prevision(2000.0, 3200.0, G, indicator_at_least(2490.0), 2001);
    LpResult hi = lp_upper_prevision(2000.0, 3200.0, G, indicator_at_least(2490.0), 2001);
    REQUIRE(lo.status == PrevisionStatus::Value);
    REQUIRE(hi.status == PrevisionStatus::Value);
    CHECK(lo.value >= -1e-9);
    CHECK(hi.value <= 1.0 + 1e-9);
    CHECK(lo.value <= hi.value);
    // cross-checked against the certificate engine
    PrevisionResult plo = pw_lower_prevision(2000.0, 3200.0, G, indicator_at_least(2490.0), 2);
    REQUIRE(plo.status == PrevisionStatus::Value);
    CHECK(plo.value <= lo.value + 1e-5);
    CHECK(std::fabs(plo.value - lo.value) <= 5e-3);
}

TEST_CASE("oracle preconditions") {
    CHECK_THROWS_AS(lp_lower_prevision(0.0, 1.0, {}, PiecewisePolynomial::constant(1.0), 50),
                    std::invalid_argument);
    CHECK_THROWS_AS(lp_conditional(0.0, 1.0, {}, 2.0, 3.0,
                                   PiecewisePolynomial::constant(1.0), 501),
                    std::invalid_argument);
}
