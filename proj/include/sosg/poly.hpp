#pragma once

// Sparse multivariate polynomials over double coefficients, the graded-lex
// monomial basis, and Gram-matrix <-> polynomial conversion. Everything here
// is an immutable value; arithmetic returns new objects, so instances can be
// shared across threads freely.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sosg/linalg.hpp"

namespace sosg {

// Coefficients with magnitude below this are dropped after arithmetic.
inline constexpr double kCoefficientEps = 1e-14;

struct Monomial {
    std::vector<int> exponents;  // one entry per variable

    Monomial() = default;
    explicit Monomial(std::vector<int> e) : exponents(std::move(e)) {}

    int degree() const;
    bool operator==(const Monomial&) const = default;
};

// Graded lexicographic: lower total degree first; within a degree, larger
// leading exponents first (1, x1, x2, x1^2, x1 x2, x2^2, ...).
struct GrlexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

Monomial operator+(const Monomial& a, const Monomial& b);

class Polynomial {
  public:
    using TermMap = std::map<Monomial, double, GrlexLess>;

    Polynomial() = default;
    explicit Polynomial(int n) : n_(n) {}

    static Polynomial constant(int n, double c);
    static Polynomial variable(int n, int i);  // the monomial x_{i+1}
    static Polynomial from_terms(int n, TermMap terms);

    int var_count() const { return n_; }
    int degree() const;  // degree of the zero polynomial is 0
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    double coefficient(const Monomial& m) const;
    double max_abs_coefficient() const;

    double eval(std::span<const double> point) const;
    double eval1(double x) const;  // univariate convenience

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double c) const;

    // Substitutes x_i = shift_i + scale_i * t_i, returning a polynomial in t.
    Polynomial substitute_affine(const std::vector<double>& shift,
                                 const std::vector<double>& scale) const;

    std::string to_string() const;

  private:
    void canonicalize();

    int n_ = 0;
    TermMap terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) { return p * c; }

// s_n(d) = C(n + d, d)
long long basis_dimension(int n, int d);

struct MonomialBasis {
    int n = 0;
    int d = 0;
    std::vector<Monomial> monomials;  // graded-lex order, size s_n(d)

    int size() const { return static_cast<int>(monomials.size()); }
    // Index of m in the basis, -1 when deg(m) > d.
    int index_of(const Monomial& m) const;
};

MonomialBasis monomial_basis(int n, int d);

struct GramRepresentation {
    MonomialBasis basis;  // degree-d basis; Q has side s_n(d)
    Mat Q;
};

// Expands v_d(x)^T Q v_d(x) into canonical polynomial form.
Polynomial gram_to_poly(const GramRepresentation& g);

}  // namespace sosg
