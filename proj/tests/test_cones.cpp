#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sosg/cones.hpp"

using namespace sosg;

namespace {

Polynomial upoly(std::initializer_list<double> coeffs_ascending) {
    // univariate helper: {c0, c1, c2, ...} -> c0 + c1 x + c2 x^2 + ...
    Polynomial::TermMap t;
    int k = 0;
    for (double c : coeffs_ascending) t[Monomial({k++})] = c;
    return Polynomial::from_terms(1, std::move(t));
}

Polynomial paper_quartic() {
    Polynomial::TermMap t;
    t[Monomial({4, 0})] = 4.0;
    t[Monomial({3, 1})] = 4.0;
    t[Monomial({2, 2})] = -3.0;
    t[Monomial({0, 4})] = 5.0;
    return Polynomial::from_terms(2, std::move(t));
}

Polynomial non_sos_positive() {
    Polynomial::TermMap t;
    t[Monomial({0, 0})] = 1.0;
    t[Monomial({4, 2})] = 1.0;
    t[Monomial({2, 4})] = 1.0;
    t[Monomial({2, 2})] = -1.0;
    return Polynomial::from_terms(2, std::move(t));
}

// The same polynomial written as x1^2 x2^2 (x1^2 + x2^2 - 1) + 1.
Polynomial non_sos_positive_factored() {
    Polynomial x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
    return x1 * x1 * x2 * x2 * (x1 * x1 + x2 * x2 - Polynomial::constant(2, 1.0)) +
           Polynomial::constant(2, 1.0);
}

// Moment vector of the 10x10 psd matrix that separates positivity from SOS.
MomentVector paper_counterexample_moments() {
    MomentVector y = MomentVector::zero(2, 3);
    const MonomialBasis full = monomial_basis(2, 6);
    auto set = [&](int a, int b, double v) { y.y[full.index_of(Monomial({a, b}))] = v; };
    set(0, 0, 1.0);
    set(2, 0, 353.0);
    set(0, 2, 353.0);
    set(4, 0, 249572.0);
    set(0, 4, 249572.0);
    set(2, 2, 66.0);
    set(6, 0, 706955894.0);
    set(0, 6, 706955894.0);
    set(4, 2, 17.0);
    set(2, 4, 17.0);
    return y;
}

}  // namespace

TEST_CASE("sos_decompose pins the unique Gram of 1/4 - x + x^2") {
    auto r = sos_decompose(upoly({0.25, -1.0, 1.0}), 1);
    REQUIRE(r.outcome == CertOutcome::Certified);
    const Mat& Q = r.gram->Q;
    CHECK(Q(0, 0) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(Q(1, 0) == doctest::Approx(-0.5).epsilon(1e-4));
    CHECK(Q(1, 1) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(sym_min_eig(Q) >= -1e-7);
}

TEST_CASE("the introduction quartic is SOS at d=2") {
    auto r = sos_decompose(paper_quartic(), 2);
    REQUIRE(r.outcome == CertOutcome::Certified);
    Polynomial rec = gram_to_poly(*r.gram);
    Polynomial diff = rec - paper_quartic();
    CHECK(diff.max_abs_coefficient() <= 1e-6);

    // certified polynomials are numerically nonnegative
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 1000; ++k) {
        double v[2] = {u(rng), u(rng)};
        double norm_vd = 1.0 + v[0] * v[0] + v[1] * v[1];
        norm_vd *= norm_vd;
        CHECK(paper_quartic().eval(std::span<const double>(v, 2)) >= -1e-6 * (1.0 + norm_vd));
    }
}

TEST_CASE("positive but non-SOS polynomials are rejected with certificates") {
    auto r1 = sos_decompose(non_sos_positive(), 3);
    CHECK(r1.outcome == CertOutcome::NotCertified);
    auto r2 = sos_decompose(non_sos_positive_factored(), 3);
    CHECK(r2.outcome == CertOutcome::NotCertified);
}

TEST_CASE("xi_certificate on [0,1]: 2x + x^2 has its unique certificate") {
    SemiAlgebraicSet omega;
    omega.n = 1;
    omega.constraints.push_back(Polynomial::variable(1, 0));  // x >= 0
    omega.constraints.push_back(upoly({1.0, -1.0}));          // 1 - x >= 0
    auto r = xi_certificate(upoly({0.0, 2.0, 1.0}), omega, 1);
    REQUIRE(r.outcome == CertOutcome::Certified);
    const XiCertificate& c = *r.certificate;
    CHECK(c.sigma0.Q(0, 0) == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(c.sigma0.Q(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(c.sigmas[0].Q(0, 0) == doctest::Approx(2.0).epsilon(1e-5));  // on x
    CHECK(c.sigmas[1].Q(0, 0) == doctest::Approx(0.0).epsilon(1e-5));  // on 1-x
    Polynomial rec = c.reconstruct(omega);
    CHECK((rec - upoly({0.0, 2.0, 1.0})).max_abs_coefficient() <= 1e-6);
}

TEST_CASE("1/8 - x(1-x) is not in Xi_2 on [0,1]") {
    SemiAlgebraicSet omega;
    omega.n = 1;
    omega.constraints.push_back(Polynomial::variable(1, 0));
    omega.constraints.push_back(upoly({1.0, -1.0}));
    auto r = xi_certificate(upoly({0.125, -1.0, 1.0}), omega, 1);
    CHECK(r.outcome == CertOutcome::NotCertified);
}

TEST_CASE("the constant 1 is trivially certified on any domain") {
    SemiAlgebraicSet omega = SemiAlgebraicSet::interval(-3.0, 7.0);
    auto r = xi_certificate(Polynomial::constant(1, 1.0), omega, 2);
    REQUIRE(r.outcome == CertOutcome::Certified);
    CHECK((r.certificate->reconstruct(omega) - Polynomial::constant(1, 1.0))
              .max_abs_coefficient() <= 1e-6);
}

TEST_CASE("moment matrix layout for n=1, d=2") {
    MomentVector y = MomentVector::zero(1, 2);
    for (int k = 0; k < 5; ++k) y.y[k] = 10.0 + k;  // y0..y4
    Mat M = moment_matrix(y);
    REQUIRE(M.rows == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(M(i, j) == doctest::Approx(10.0 + i + j));
}

TEST_CASE("the 10x10 counterexample moment matrix is psd and gives L(f) = -31") {
    MomentVector y = paper_counterexample_moments();
    Mat M = moment_matrix(y);
    REQUIRE(M.rows == 10);
    // spot-check the printed entries
    const MonomialBasis b3 = monomial_basis(2, 3);
    CHECK(M(0, 0) == 1.0);
    CHECK(M(0, 3) == 353.0);
    CHECK(M(1, 6) == 249572.0);
    CHECK(M(4, 4) == 66.0);
    CHECK(M(6, 6) == 706955894.0);
    CHECK(M(7, 7) == 17.0);
    double norm = 0.0;
    for (double v : M.a) norm = std::max(norm, std::fabs(v));
    CHECK(sym_min_eig(M) >= -1e-6 * norm);

    Polynomial f = non_sos_positive();
    CHECK(apply_functional(y, f) == doctest::Approx(-31.0).epsilon(1e-12));
}

TEST_CASE("point-mass moments give rank-one psd moment matrices") {
    MomentVector y = MomentVector::point_mass({0.7, -1.3}, 2);
    Mat M = moment_matrix(y);
    Vec w;
    Mat V;
    sym_eig(M, w, V);
    const int s = M.rows;
    CHECK(w[0] >= -1e-9);
    // second largest singular value is tiny relative to the first
    CHECK(std::fabs(w[s - 2]) <= 1e-7 * w[s - 1]);
    // and L acts as evaluation
    Polynomial g = paper_quartic();
    const double x[2] = {0.7, -1.3};
    CHECK(apply_functional(y, g) ==
          doctest::Approx(g.eval(std::span<const double>(x, 2))).epsilon(1e-10));
}

TEST_CASE("localizing matrices on [0,1] at d=1") {
    MomentVector y = MomentVector::zero(1, 1);
    y.y = {1.0, 0.3, 0.2};
    Mat Mx = localizing_matrix(Polynomial::variable(1, 0), y);
    REQUIRE(Mx.rows == 1);
    CHECK(Mx(0, 0) == doctest::Approx(0.3));
    Mat M1x = localizing_matrix(upoly({1.0, -1.0}), y);
    CHECK(M1x(0, 0) == doctest::Approx(0.7));
    // c = 1 has half-degree 0: localizing equals the moment matrix
    Mat M1 = localizing_matrix(Polynomial::constant(1, 1.0), y);
    Mat Mm = moment_matrix(y);
    REQUIRE(M1.rows == Mm.rows);
    for (int i = 0; i < M1.rows; ++i)
        for (int j = 0; j < M1.cols; ++j) CHECK(M1(i, j) == doctest::Approx(Mm(i, j)));
}

TEST_CASE("trace identity: L(g) = Tr(Q M(y)) for random Gram/moment pairs") {
    std::mt19937 rng(613);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const MonomialBasis half = monomial_basis(2, 2);
    const int s = half.size();
    for (int rep = 0; rep < 100; ++rep) {
        MomentVector y = MomentVector::zero(2, 2);
        for (auto& v : y.y) v = u(rng);
        GramRepresentation g;
        g.basis = half;
        g.Q = Mat(s, s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j <= i; ++j) {
                double v = u(rng);
                g.Q(i, j) = v;
                g.Q(j, i) = v;
            }
        Mat M = moment_matrix(y);
        double tr = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) tr += g.Q(i, j) * M(j, i);
        CHECK(std::fabs(apply_functional(y, gram_to_poly(g)) - tr) <= 1e-8);
    }
}

TEST_CASE("Fejer consistency: psd moment matrix pairs nonnegatively with psd Grams") {
    std::mt19937 rng(617);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // a psd moment vector: mixture of point masses
    MomentVector y = MomentVector::zero(1, 2);
    for (int k = 0; k < 6; ++k) {
        MomentVector p = MomentVector::point_mass({u(rng)}, 2);
        for (size_t i = 0; i < y.y.size(); ++i) y.y[i] += p.y[i] / 6.0;
    }
    Mat M = moment_matrix(y);
    CHECK(sym_min_eig(M) >= -1e-10);
    const int s = M.rows;
    for (int rep = 0; rep < 100; ++rep) {
        Mat B(s, s);
        for (auto& v : B.a) v = u(rng);
        Mat Q = matmul(B, transpose(B));  // psd
        double tr = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) tr += Q(i, j) * M(j, i);
        CHECK(tr >= -1e-8);
    }
}

TEST_CASE("gram_squares expands a certificate into explicit squares") {
    auto r = sos_decompose(paper_quartic(), 2);
    REQUIRE(r.outcome == CertOutcome::Certified);
    auto squares = gram_squares(*r.gram);
    REQUIRE_FALSE(squares.empty());
    Polynomial sum(2);
    for (const auto& q : squares) sum = sum + q * q;
    CHECK((sum - paper_quartic()).max_abs_coefficient() <= 1e-5);
}

TEST_CASE("degree and dimension preconditions are enforced") {
    MomentVector y = MomentVector::zero(1, 1);
    y.y = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(apply_functional(y, upoly({0, 0, 0, 1.0})), std::invalid_argument);
    CHECK_THROWS_AS(localizing_matrix(upoly({0, 0, 0, 1.0}), y), std::invalid_argument);
    CHECK_THROWS_AS(xi_certificate(upoly({1.0}), SemiAlgebraicSet::reals(1), -1),
                    std::invalid_argument);
}
