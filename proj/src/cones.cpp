#include "sosg/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace sosg {

int SemiAlgebraicSet::half_degree(int j) const {
    const int deg = constraints.at(j).degree();
    return (deg + 1) / 2;
}

int SemiAlgebraicSet::max_half_degree() const {
    int m = 0;
    for (size_t j = 0; j < constraints.size(); ++j)
        m = std::max(m, half_degree(static_cast<int>(j)));
    return m;
}

SemiAlgebraicSet SemiAlgebraicSet::reals(int n) {
    SemiAlgebraicSet s;
    s.n = n;
    return s;
}

SemiAlgebraicSet SemiAlgebraicSet::interval(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("interval: need a < b");
    SemiAlgebraicSet s;
    s.n = 1;
    s.constraints.push_back(Polynomial::variable(1, 0) - Polynomial::constant(1, a));
    s.constraints.push_back(Polynomial::constant(1, b) - Polynomial::variable(1, 0));
    return s;
}

Polynomial XiCertificate::reconstruct(const SemiAlgebraicSet& omega) const {
    Polynomial p = gram_to_poly(sigma0);
    if (sigmas.size() != omega.constraints.size())
        throw std::invalid_argument("certificate does not match the constraint list");
    for (size_t j = 0; j < sigmas.size(); ++j)
        p = p + gram_to_poly(sigmas[j]) * omega.constraints[j];
    return p;
}

double XiCertificate::min_gram_eig() const {
    double m = sym_min_eig(sigma0.Q);
    for (const auto& g : sigmas)
        if (g.Q.rows > 0) m = std::min(m, sym_min_eig(g.Q));
    return m;
}

namespace detail {

void add_gram_times_poly(SdpProblem& prob, const std::vector<int>& row_of_monomial,
                         const MonomialBasis& full_basis, int block,
                         const MonomialBasis& gram_basis, const Polynomial& c,
                         double sign) {
    const int s = gram_basis.size();
    for (int i = 0; i < s; ++i)
        for (int j = 0; j <= i; ++j) {
            const Monomial pair = gram_basis.monomials[i] + gram_basis.monomials[j];
            const double w = (i == j) ? 1.0 : 2.0;  // Q_ij and Q_ji both appear
            for (const auto& [gamma, cv] : c.terms()) {
                const int idx = full_basis.index_of(pair + gamma);
                if (idx < 0)
                    throw std::logic_error("certificate term exceeds the degree-2d basis");
                prob.term_entry(row_of_monomial[idx], block, i, j, sign * w * cv);
            }
        }
}

XiBlocks add_xi_blocks(SdpProblem& prob, const std::vector<int>& row_of_monomial,
                       const MonomialBasis& full_basis, const SemiAlgebraicSet& omega,
                       int d, double sign) {
    const int n = omega.n;
    XiBlocks xb;
    xb.sigma0_basis = monomial_basis(n, d);
    xb.sigma0_block = prob.add_block(xb.sigma0_basis.size());
    add_gram_times_poly(prob, row_of_monomial, full_basis, xb.sigma0_block,
                        xb.sigma0_basis, Polynomial::constant(n, 1.0), sign);
    for (size_t j = 0; j < omega.constraints.size(); ++j) {
        const int dj = d - omega.half_degree(static_cast<int>(j));
        xb.sigma_bases.push_back(monomial_basis(n, dj));
        xb.sigma_blocks.push_back(prob.add_block(xb.sigma_bases.back().size()));
        add_gram_times_poly(prob, row_of_monomial, full_basis, xb.sigma_blocks.back(),
                            xb.sigma_bases.back(), omega.constraints[j], sign);
    }
    return xb;
}

XiCertificate xi_from_solution(const SdpSolution& sol, const XiBlocks& blocks) {
    XiCertificate cert;
    cert.sigma0 = {blocks.sigma0_basis, sol.block_values[blocks.sigma0_block]};
    for (size_t j = 0; j < blocks.sigma_blocks.size(); ++j)
        cert.sigmas.push_back({blocks.sigma_bases[j], sol.block_values[blocks.sigma_blocks[j]]});
    return cert;
}

}  // namespace detail

namespace {

// Sets up the shared part of the membership programs: one equality row per
// degree-2d monomial with the coefficients of p on the right-hand side.
std::vector<int> coefficient_rows(SdpProblem& prob, const MonomialBasis& full_basis,
                                  const Polynomial& p) {
    std::vector<int> rows(full_basis.size());
    for (int k = 0; k < full_basis.size(); ++k)
        rows[k] = prob.add_constraint(p.coefficient(full_basis.monomials[k]));
    return rows;
}

bool reconstruction_close(const Polynomial& got, const Polynomial& want) {
    const double tol = 1e-6 * (1.0 + want.max_abs_coefficient());
    Polynomial diff = got - want;
    return diff.max_abs_coefficient() <= tol;
}

}  // namespace

SosDecomposition sos_decompose(const Polynomial& p, int d, const SdpSettings& settings) {
    SemiAlgebraicSet omega = SemiAlgebraicSet::reals(p.var_count());
    XiMembership xi = xi_certificate(p, omega, d, settings);
    SosDecomposition r;
    r.outcome = xi.outcome;
    if (xi.certificate) r.gram = std::move(xi.certificate->sigma0);
    return r;
}

XiMembership xi_certificate(const Polynomial& p, const SemiAlgebraicSet& omega, int d,
                            const SdpSettings& settings) {
    const int n = p.var_count();
    if (n != omega.n)
        throw std::invalid_argument("xi_certificate: variable count mismatch");
    if (p.degree() > 2 * d)
        throw std::invalid_argument("xi_certificate: deg(p) must be <= 2d");
    if (d < omega.max_half_degree())
        throw std::invalid_argument("xi_certificate: d below the constraint half-degrees");

    const MonomialBasis full = monomial_basis(n, 2 * d);
    SdpProblem prob;
    prob.sense = Sense::Minimize;
    std::vector<int> rows = coefficient_rows(prob, full, p);
    detail::XiBlocks xb = detail::add_xi_blocks(prob, rows, full, omega, d);

    SdpSolution sol = solve(prob, settings);
    XiMembership result;
    switch (sol.status) {
        case SdpStatus::Infeasible:
            result.outcome = CertOutcome::NotCertified;
            return result;
        case SdpStatus::Optimal: {
            XiCertificate cert = detail::xi_from_solution(sol, xb);
            // never certify without verifying the algebra
            if (reconstruction_close(cert.reconstruct(omega), p) &&
                cert.min_gram_eig() >= -1e-7) {
                result.outcome = CertOutcome::Certified;
                result.certificate = std::move(cert);
            } else {
                result.outcome = CertOutcome::Inconclusive;
            }
            return result;
        }
        default:
            result.outcome = CertOutcome::Inconclusive;
            return result;
    }
}

std::vector<Polynomial> gram_squares(const GramRepresentation& g) {
    // Outer-product Cholesky with diagonal pivoting; small pivots are zero.
    const int s = g.basis.size();
    Mat A = g.Q;
    std::vector<int> perm(s);
    for (int i = 0; i < s; ++i) perm[i] = i;
    std::vector<Vec> cols;
    for (int k = 0; k < s; ++k) {
        int p = k;
        for (int i = k; i < s; ++i)
            if (A(perm[i], perm[i]) > A(perm[p], perm[p])) p = i;
        std::swap(perm[k], perm[p]);
        const double piv = A(perm[k], perm[k]);
        if (piv < 1e-9) break;
        Vec col(s, 0.0);
        const double r = std::sqrt(piv);
        for (int i = k; i < s; ++i) col[perm[i]] = A(perm[i], perm[k]) / r;
        for (int i = k; i < s; ++i)
            for (int j = k; j < s; ++j)
                A(perm[i], perm[j]) -= col[perm[i]] * col[perm[j]];
        cols.push_back(std::move(col));
    }
    std::vector<Polynomial> out;
    for (const auto& col : cols) {
        Polynomial q(g.basis.n);
        for (int i = 0; i < s; ++i) {
            if (col[i] == 0.0) continue;
            Polynomial::TermMap t;
            t[g.basis.monomials[i]] = col[i];
            q = q + Polynomial::from_terms(g.basis.n, std::move(t));
        }
        out.push_back(std::move(q));
    }
    return out;
}

bool MomentVector::normalized(double tol) const {
    return !y.empty() && std::fabs(y[0] - 1.0) <= tol;
}

MomentVector MomentVector::zero(int n, int d) {
    MomentVector v;
    v.n = n;
    v.d = d;
    v.y.assign(basis_dimension(n, 2 * d), 0.0);
    return v;
}

MomentVector MomentVector::point_mass(const std::vector<double>& x, int d) {
    MomentVector v = zero(static_cast<int>(x.size()), d);
    const MonomialBasis full = monomial_basis(v.n, 2 * d);
    for (int k = 0; k < full.size(); ++k) {
        double t = 1.0;
        for (int i = 0; i < v.n; ++i)
            for (int e = 0; e < full.monomials[k].exponents[i]; ++e) t *= x[i];
        v.y[k] = t;
    }
    return v;
}

Mat moment_matrix(const MomentVector& y) {
    const MonomialBasis half = monomial_basis(y.n, y.d);
    const MonomialBasis full = monomial_basis(y.n, 2 * y.d);
    if (static_cast<int>(y.y.size()) != full.size())
        throw std::invalid_argument("moment vector has the wrong length");
    const int s = half.size();
    Mat M(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j <= i; ++j) {
            const int idx = full.index_of(half.monomials[i] + half.monomials[j]);
            M(i, j) = y.y[idx];
            M(j, i) = y.y[idx];
        }
    return M;
}

Mat localizing_matrix(const Polynomial& c, const MomentVector& y) {
    if (c.var_count() != y.n)
        throw std::invalid_argument("localizing_matrix: variable count mismatch");
    const int nc = (c.degree() + 1) / 2;
    if (y.d - nc < 0)
        throw std::invalid_argument("localizing_matrix: d - n_c is negative");
    const MonomialBasis half = monomial_basis(y.n, y.d - nc);
    const MonomialBasis full = monomial_basis(y.n, 2 * y.d);
    if (static_cast<int>(y.y.size()) != full.size())
        throw std::invalid_argument("moment vector has the wrong length");
    const int s = half.size();
    Mat M(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = 0.0;
            for (const auto& [gamma, cv] : c.terms()) {
                const int idx = full.index_of(half.monomials[i] + half.monomials[j] + gamma);
                if (idx < 0) throw std::invalid_argument("localizing_matrix: degree mismatch");
                v += cv * y.y[idx];
            }
            M(i, j) = v;
            M(j, i) = v;
        }
    return M;
}

double apply_functional(const MomentVector& y, const Polynomial& g) {
    if (g.var_count() != y.n)
        throw std::invalid_argument("apply_functional: variable count mismatch");
    if (g.degree() > 2 * y.d)
        throw std::invalid_argument("apply_functional: deg(g) exceeds 2d");
    const MonomialBasis full = monomial_basis(y.n, 2 * y.d);
    double s = 0.0;
    for (const auto& [m, c] : g.terms()) s += c * y.y[full.index_of(m)];
    return s;
}

}  // namespace sosg
