#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sosg/piecewise.hpp"
#include "testutil.hpp"

using namespace sosg;
using testutil::upoly;

namespace {

// G = {x - m, m - x} as piecewise gambles
std::vector<PiecewisePolynomial> markov_gambles(double m) {
    Polynomial g = upoly({-m, 1.0});
    return {PiecewisePolynomial::from_polynomial(g),
            PiecewisePolynomial::from_polynomial(-g)};
}

}  // namespace

TEST_CASE("call payoff evaluation") {
    PiecewisePolynomial c = call_payoff(2490.0);
    CHECK(c.eval(2543.8) == doctest::Approx(53.8));
    CHECK(c.eval(2000.0) == doctest::Approx(0.0));
    PiecewisePolynomial z = call_payoff(0.0);
    CHECK(z.eval(7.25) == doctest::Approx(7.25));
    CHECK(z.eval(1e4) == doctest::Approx(1e4));
}

TEST_CASE("indicator is right-continuous") {
    PiecewisePolynomial f = indicator_at_least(5.0);
    CHECK(f.eval(5.0) == doctest::Approx(1.0));
    CHECK(f.eval(4.999) == doctest::Approx(0.0));
    CHECK(f.eval(12.0) == doctest::Approx(1.0));
    // threshold below the domain: constant 1 on it
    PiecewisePolynomial g = indicator_at_least(-1.0);
    for (double x : {0.0, 3.7, 10.0}) CHECK(g.eval(x) == doctest::Approx(1.0));
}

TEST_CASE("partition splits at interior breakpoints only") {
    auto r1 = partition(0.0, 10.0, {indicator_at_least(4.0)});
    REQUIRE(r1.size() == 2);
    CHECK(r1[0].lower == 0.0);
    CHECK(r1[0].upper == 4.0);
    CHECK(r1[1].lower == 4.0);
    CHECK(r1[1].upper == 10.0);

    auto r2 = partition(0.0, 3000.0, {call_payoff(2490.0), call_payoff(2495.0)});
    REQUIRE(r2.size() == 3);
    CHECK(r2[1].lower == 2490.0);
    CHECK(r2[1].upper == 2495.0);

    auto r3 = partition(-1.0, 1.0, {});
    REQUIRE(r3.size() == 1);
    CHECK(r3[0].lower == -1.0);
    CHECK(r3[0].upper == 1.0);

    // breakpoints outside or at the edge do not split
    auto r4 = partition(0.0, 10.0, {indicator_at_least(10.0), indicator_at_least(-2.0)});
    CHECK(r4.size() == 1);

    CHECK_THROWS_AS(partition(1.0, 1.0, {}), std::invalid_argument);
}

TEST_CASE("piecewise arithmetic refines breakpoints") {
    PiecewisePolynomial s = call_payoff(2.0) - call_payoff(5.0);  // call spread
    CHECK(s.eval(1.0) == doctest::Approx(0.0));
    CHECK(s.eval(4.0) == doctest::Approx(2.0));
    CHECK(s.eval(9.0) == doctest::Approx(3.0));
    PiecewisePolynomial prod = s * indicator_at_least(4.5);
    CHECK(prod.eval(4.0) == doctest::Approx(0.0));
    CHECK(prod.eval(4.5) == doctest::Approx(2.5));
}

TEST_CASE("Markov bound via piecewise previsions") {
    // upper prevision of I_{[u,inf)} with E[x] pinned at m is min(1, m/u)
    for (auto [m, u, xmax] :
         {std::tuple{2.0, 5.0, 10.0}, std::tuple{1.0, 4.0, 8.0}, std::tuple{3.0, 4.0, 10.0}}) {
        PrevisionResult r =
            pw_upper_prevision(0.0, xmax, markov_gambles(m), indicator_at_least(u), 2);
        REQUIRE(r.status == PrevisionStatus::Value);
        CHECK(r.value == doctest::Approx(std::min(1.0, m / u)).epsilon(1e-4));
    }
    // m >= u: the bound saturates at 1
    PrevisionResult sat =
        pw_upper_prevision(0.0, 10.0, markov_gambles(6.0), indicator_at_least(5.0), 2);
    REQUIRE(sat.status == PrevisionStatus::Value);
    CHECK(sat.value == doctest::Approx(1.0).epsilon(1e-5));
    // threshold below the domain: certainly happens
    PrevisionResult low =
        pw_upper_prevision(0.0, 10.0, markov_gambles(2.0), indicator_at_least(-1.0), 2);
    REQUIRE(low.status == PrevisionStatus::Value);
    CHECK(low.value == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("single polynomial region agrees with the assessment-set path") {
    std::mt19937 rng(4242);
    SdpSettings tight;  // the 1e-7 agreement bound presumes near-exact optima
    tight.gap_tol = 1e-9;
    for (int rep = 0; rep < 6; ++rep) {
        auto inst = testutil::random_instance(rng, 2);
        PrevisionResult generic = lower_prevision(inst.assess, inst.f, tight);
        std::vector<PiecewisePolynomial> G;
        for (const auto& g : inst.assess.gambles)
            G.push_back(PiecewisePolynomial::from_polynomial(g));
        PrevisionResult pw = pw_lower_prevision(
            inst.a, inst.b, G, PiecewisePolynomial::from_polynomial(inst.f), 2, tight);
        REQUIRE(pw.status == generic.status);
        if (generic.status == PrevisionStatus::Value)
            CHECK(std::fabs(pw.value - generic.value) <= 1e-7);
    }
}

TEST_CASE("region certificates imply pointwise nonnegativity at the optimum") {
    const double a = 0.0, b = 10.0;
    std::vector<PiecewisePolynomial> G = markov_gambles(2.0);
    PiecewisePolynomial f = indicator_at_least(5.0);
    PrevisionResult r = pw_lower_prevision(a, b, G, f, 2);
    REQUIRE(r.status == PrevisionStatus::Value);
    REQUIRE(r.region_certificates.size() == 2);
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> u(a, b);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng);
        double v = f.eval(x) - r.value;
        for (size_t j = 0; j < G.size(); ++j) v -= r.lambda[j] * G[j].eval(x);
        CHECK(v >= -1e-5);
    }
    // and each certificate reconstructs its region's constraint polynomial
    auto regions = partition(a, b, {G[0], G[1], f});
    for (size_t ri = 0; ri < regions.size(); ++ri) {
        const double mid = 0.5 * (regions[ri].lower + regions[ri].upper);
        Polynomial lhs = f.pieces[f.piece_index(mid)] - Polynomial::constant(1, r.value);
        for (size_t j = 0; j < G.size(); ++j)
            lhs = lhs - G[j].pieces[G[j].piece_index(mid)] * r.lambda[j];
        Polynomial rec = r.region_certificates[ri].reconstruct(regions[ri].constraints());
        CHECK((lhs - rec).max_abs_coefficient() <= 1e-5 * (1.0 + lhs.max_abs_coefficient()));
    }
}

TEST_CASE("indicator probability bounds are monotone in the threshold") {
    std::vector<PiecewisePolynomial> G = markov_gambles(3.0);
    double prev_up = 2.0, prev_lo = 2.0;
    for (double c = 1.0; c <= 9.0; c += 2.0) {
        PrevisionResult up = pw_upper_prevision(0.0, 10.0, G, indicator_at_least(c), 2);
        PrevisionResult lo = pw_lower_prevision(0.0, 10.0, G, indicator_at_least(c), 2);
        REQUIRE(up.status == PrevisionStatus::Value);
        REQUIRE(lo.status == PrevisionStatus::Value);
        CHECK(lo.value <= up.value + 1e-7);
        CHECK(up.value <= prev_up + 1e-6);
        CHECK(lo.value <= prev_lo + 1e-6);
        CHECK(up.value >= -1e-7);
        CHECK(up.value <= 1.0 + 1e-7);
        prev_up = up.value;
        prev_lo = lo.value;
    }
}

TEST_CASE("the Markov bound is already exact at d=2 and stays there") {
    double prev = -1.0;
    for (int d : {2, 3, 4}) {
        PrevisionResult r =
            pw_upper_prevision(0.0, 10.0, markov_gambles(2.0), indicator_at_least(5.0), d);
        REQUIRE(r.status == PrevisionStatus::Value);
        CHECK(r.value == doctest::Approx(0.4).epsilon(1e-4));
        if (prev >= 0.0) CHECK(std::fabs(r.value - prev) <= 1e-4);
        prev = r.value;
    }
}

TEST_CASE("piecewise avoiding-sure-loss dichotomy") {
    for (double m : {0.5, 5.0, 9.5}) {
        AslResult r = pw_avoids_sure_loss(0.0, 10.0, markov_gambles(m), 2);
        CHECK(r.outcome == AslResult::Outcome::Avoids);
    }
    for (double m : {-1.0, 11.0}) {
        AslResult r = pw_avoids_sure_loss(0.0, 10.0, markov_gambles(m), 2);
        CHECK(r.outcome == AslResult::Outcome::SureLoss);
        CHECK(r.lambda0 == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("unbounded domains and excessive degrees are rejected") {
    std::vector<PiecewisePolynomial> G;
    CHECK_THROWS_AS(
        pw_lower_prevision(0.0, std::numeric_limits<double>::infinity(), G,
                           indicator_at_least(1.0), 2),
        std::invalid_argument);
    PiecewisePolynomial f = PiecewisePolynomial::from_polynomial(upoly({0, 0, 0, 0, 0, 1.0}));
    CHECK_THROWS_AS(pw_lower_prevision(0.0, 1.0, G, f, 2), std::invalid_argument);
}
