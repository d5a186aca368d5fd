#pragma once

// Certificate machinery: SOS membership, membership in the truncated
// Putinar cone Xi_2d over a semi-algebraic set, and the moment / localizing
// matrices of the dual side. "Not a member" is only ever reported together
// with a solver infeasibility certificate; solver breakdowns surface as a
// distinct inconclusive outcome.

#include <optional>
#include <vector>

#include "sosg/poly.hpp"
#include "sosg/sdp.hpp"

namespace sosg {

struct SemiAlgebraicSet {
    int n = 0;
    std::vector<Polynomial> constraints;  // the set {x : c_j(x) >= 0 for all j}

    // n_{c_j}: deg(c_j) is 2 n_c or 2 n_c - 1.
    int half_degree(int j) const;
    int max_half_degree() const;
    bool is_reals() const { return constraints.empty(); }

    static SemiAlgebraicSet reals(int n);
    static SemiAlgebraicSet interval(double a, double b);  // {x-a >= 0, b-x >= 0}
};

struct XiCertificate {
    GramRepresentation sigma0;               // degree d
    std::vector<GramRepresentation> sigmas;  // degree d - n_{c_j}, one per constraint

    // sigma0 + sum_j sigma_j c_j as a polynomial.
    Polynomial reconstruct(const SemiAlgebraicSet& omega) const;
    double min_gram_eig() const;
};

enum class CertOutcome { Certified, NotCertified, Inconclusive };

struct SosDecomposition {
    CertOutcome outcome = CertOutcome::Inconclusive;
    std::optional<GramRepresentation> gram;
};

struct XiMembership {
    CertOutcome outcome = CertOutcome::Inconclusive;
    std::optional<XiCertificate> certificate;
};

// Gram representation of p over the degree-d basis with Q psd, when one
// exists. The returned matrix is the solver's analytic-center-like interior
// point of the feasible Gram set.
SosDecomposition sos_decompose(const Polynomial& p, int d,
                               const SdpSettings& settings = {});

// Membership of p in Xi_2d over omega; coincides with sos_decompose when
// omega has no constraints.
XiMembership xi_certificate(const Polynomial& p, const SemiAlgebraicSet& omega, int d,
                            const SdpSettings& settings = {});

// Display-only expansion of a Gram matrix into an explicit list of squared
// polynomials (pivoted Cholesky; pivots below 1e-9 are treated as zero).
std::vector<Polynomial> gram_squares(const GramRepresentation& g);

struct MomentVector {
    int n = 0;
    int d = 0;
    Vec y;  // indexed by monomial_basis(n, 2d); y[0] is the constant entry

    bool normalized(double tol = 1e-12) const;
    static MomentVector zero(int n, int d);
    // Moments of the point mass at x: y_alpha = x^alpha.
    static MomentVector point_mass(const std::vector<double>& x, int d);
};

// M_{n,d}(y): entry (a,b) = y_{a+b}, side s_n(d).
Mat moment_matrix(const MomentVector& y);

// Localizing matrix M_{n,d-n_c}(c y): entry (a,b) = sum_g c_g y_{a+b+g}.
Mat localizing_matrix(const Polynomial& c, const MomentVector& y);

// L(g) = sum_a g_a y_a; equals Tr(Q M_{n,d}(y)) for any Gram Q of g.
double apply_functional(const MomentVector& y, const Polynomial& g);

namespace detail {

// Adds to `row` the coefficient-matching terms of multiplier * c over the
// given Gram block: for every basis pair (i >= j) and every term of c, the
// monomial b_i + b_j + gamma receives the pair's contribution. Rows are
// indexed by the degree-2d basis; used by every certificate-side program.
void add_gram_times_poly(SdpProblem& prob, const std::vector<int>& row_of_monomial,
                         const MonomialBasis& full_basis, int block,
                         const MonomialBasis& gram_basis, const Polynomial& c,
                         double sign = 1.0);

// One sigma_0 block of degree d plus one sigma_j block of degree d - n_{c_j}
// per constraint, all wired into the given coefficient rows with `sign`.
struct XiBlocks {
    int sigma0_block = -1;
    MonomialBasis sigma0_basis;
    std::vector<int> sigma_blocks;
    std::vector<MonomialBasis> sigma_bases;
};

XiBlocks add_xi_blocks(SdpProblem& prob, const std::vector<int>& row_of_monomial,
                       const MonomialBasis& full_basis, const SemiAlgebraicSet& omega,
                       int d, double sign = 1.0);

XiCertificate xi_from_solution(const SdpSolution& sol, const XiBlocks& blocks);

}  // namespace detail

}  // namespace sosg
