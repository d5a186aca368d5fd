#include "sosg/poly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sosg {

int Monomial::degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
}

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    // Within a degree block x1^2 comes before x1 x2 before x2^2:
    // lexicographically larger exponent vectors come first.
    return a.exponents > b.exponents;
}

Monomial operator+(const Monomial& a, const Monomial& b) {
    if (a.exponents.size() != b.exponents.size())
        throw std::invalid_argument("monomial sum: variable count mismatch");
    Monomial r = a;
    for (size_t i = 0; i < r.exponents.size(); ++i) r.exponents[i] += b.exponents[i];
    return r;
}

Polynomial Polynomial::constant(int n, double c) {
    Polynomial p(n);
    if (std::fabs(c) >= kCoefficientEps)
        p.terms_.emplace(Monomial(std::vector<int>(n, 0)), c);
    return p;
}

Polynomial Polynomial::variable(int n, int i) {
    if (i < 0 || i >= n) throw std::invalid_argument("variable index out of range");
    Polynomial p(n);
    std::vector<int> e(n, 0);
    e[i] = 1;
    p.terms_.emplace(Monomial(std::move(e)), 1.0);
    return p;
}

Polynomial Polynomial::from_terms(int n, TermMap terms) {
    Polynomial p(n);
    p.terms_ = std::move(terms);
    for (const auto& [m, c] : p.terms_)
        if (static_cast<int>(m.exponents.size()) != n)
            throw std::invalid_argument("term exponent length must equal variable count");
    p.canonicalize();
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

double Polynomial::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v = std::max(v, std::fabs(c));
    return v;
}

namespace {
double powi(double x, int e) {
    double r = 1.0;
    while (e > 0) {
        if (e & 1) r *= x;
        x *= x;
        e >>= 1;
    }
    return r;
}
}  // namespace

double Polynomial::eval(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != n_)
        throw std::invalid_argument("eval: point dimension mismatch");
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (int i = 0; i < n_; ++i)
            if (m.exponents[i] != 0) t *= powi(point[i], m.exponents[i]);
        s += t;
    }
    return s;
}

double Polynomial::eval1(double x) const {
    const double pt[1] = {x};
    return eval(std::span<const double>(pt, 1));
}

void Polynomial::canonicalize() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::fabs(it->second) < kCoefficientEps)
            it = terms_.erase(it);
        else
            ++it;
    }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    if (n_ != o.n_) throw std::invalid_argument("polynomial sum: variable count mismatch");
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.terms_[m] += c;
    r.canonicalize();
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (n_ != o.n_) throw std::invalid_argument("polynomial product: variable count mismatch");
    Polynomial r(n_);
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.terms_[ma + mb] += ca * cb;
    r.canonicalize();
    return r;
}

Polynomial Polynomial::operator*(double c) const {
    Polynomial r = *this;
    for (auto& [m, v] : r.terms_) v *= c;
    r.canonicalize();
    return r;
}

Polynomial Polynomial::substitute_affine(const std::vector<double>& shift,
                                         const std::vector<double>& scale) const {
    if (static_cast<int>(shift.size()) != n_ || static_cast<int>(scale.size()) != n_)
        throw std::invalid_argument("substitute_affine: dimension mismatch");
    Polynomial result(n_);
    for (const auto& [m, c] : terms_) {
        Polynomial term = Polynomial::constant(n_, c);
        for (int i = 0; i < n_; ++i) {
            if (m.exponents[i] == 0) continue;
            Polynomial lin =
                Polynomial::constant(n_, shift[i]) + Polynomial::variable(n_, i) * scale[i];
            for (int e = 0; e < m.exponents[i]; ++e) term = term * lin;
        }
        result = result + term;
    }
    return result;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << (c >= 0 ? " + " : " - ");
        else if (c < 0) os << "-";
        first = false;
        os << std::fabs(c);
        for (int i = 0; i < n_; ++i) {
            if (m.exponents[i] == 0) continue;
            os << "*x" << (i + 1);
            if (m.exponents[i] > 1) os << "^" << m.exponents[i];
        }
    }
    return os.str();
}

long long basis_dimension(int n, int d) {
    if (n < 1 || d < 0) throw std::invalid_argument("basis_dimension: need n >= 1, d >= 0");
    long long r = 1;
    for (int i = 1; i <= n; ++i) r = r * (d + i) / i;
    return r;
}

namespace {
void enumerate_degree(int n, int k, std::vector<int>& cur, std::vector<Monomial>& out) {
    if (n == 1) {
        cur.push_back(k);
        out.emplace_back(cur);
        cur.pop_back();
        return;
    }
    for (int e = k; e >= 0; --e) {
        cur.push_back(e);
        enumerate_degree(n - 1, k - e, cur, out);
        cur.pop_back();
    }
}
}  // namespace

MonomialBasis monomial_basis(int n, int d) {
    if (n < 1 || d < 0) throw std::invalid_argument("monomial_basis: need n >= 1, d >= 0");
    MonomialBasis b;
    b.n = n;
    b.d = d;
    std::vector<int> cur;
    for (int k = 0; k <= d; ++k) enumerate_degree(n, k, cur, b.monomials);
    return b;
}

int MonomialBasis::index_of(const Monomial& m) const {
    if (m.degree() > d) return -1;
    // Monomials of each degree are contiguous; binary search with grlex.
    GrlexLess less;
    auto it = std::lower_bound(monomials.begin(), monomials.end(), m, less);
    if (it == monomials.end() || !(*it == m)) return -1;
    return static_cast<int>(it - monomials.begin());
}

Polynomial gram_to_poly(const GramRepresentation& g) {
    const int s = g.basis.size();
    if (g.Q.rows != s || g.Q.cols != s)
        throw std::invalid_argument("gram_to_poly: Q side must equal basis size");
    Polynomial::TermMap terms;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            const double q = g.Q(i, j);
            if (q == 0.0) continue;
            terms[g.basis.monomials[i] + g.basis.monomials[j]] += q;
        }
    return Polynomial::from_terms(g.basis.n, std::move(terms));
}

}  // namespace sosg
