#include "sosg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sosg {

namespace {
bool g_parallel =
#ifdef _OPENMP
    true;
#else
    false;
#endif
}  // namespace

bool parallel_kernels_enabled() { return g_parallel; }

void set_parallel_kernels(bool on) {
#ifdef _OPENMP
    g_parallel = on;
#else
    g_parallel = false;
    (void)on;
#endif
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
}

void axpy(double alpha, const Vec& x, Vec& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec matvec(const Mat& A, const Vec& x) {
    Vec y(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        const double* row = &A.a[static_cast<size_t>(i) * A.cols];
        for (int j = 0; j < A.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vec matvec_t(const Mat& A, const Vec& x) {
    Vec y(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double* row = &A.a[static_cast<size_t>(i) * A.cols];
        for (int j = 0; j < A.cols; ++j) y[j] += row[j] * x[i];
    }
    return y;
}

Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

Mat matmul_serial(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        double* ci = &C.a[static_cast<size_t>(i) * C.cols];
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            const double* bk = &B.a[static_cast<size_t>(k) * B.cols];
            for (int j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

Mat matmul_omp(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
    Mat C(A.rows, B.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < A.rows; ++i) {
        double* ci = &C.a[static_cast<size_t>(i) * C.cols];
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            const double* bk = &B.a[static_cast<size_t>(k) * B.cols];
            for (int j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

Mat matmul(const Mat& A, const Mat& B) {
    // Threading pays off only past a few hundred rows; row-parallel keeps
    // each output row's summation order fixed, so both paths agree bitwise.
    if (g_parallel && static_cast<long long>(A.rows) * A.cols * B.cols > 262144)
        return matmul_omp(A, B);
    return matmul_serial(A, B);
}

Mat sym_sandwich(const Mat& G, const Mat& S) {
    Mat T = matmul(S, G);
    Mat C = matmul(G, T);
    // Symmetrize to kill round-off drift.
    for (int i = 0; i < C.rows; ++i)
        for (int j = 0; j < i; ++j) {
            double v = 0.5 * (C(i, j) + C(j, i));
            C(i, j) = v;
            C(j, i) = v;
        }
    return C;
}

bool cholesky(const Mat& A, Mat& L, double tol) {
    if (!A.square()) throw std::invalid_argument("cholesky: not square");
    const int n = A.rows;
    L = Mat(n, n);
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::fabs(A(i, i)));
    const double floor_val = tol * std::max(dmax, 1.0);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= floor_val) return false;
        const double ljj = std::sqrt(d);
        L(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return true;
}

Vec lower_solve(const Mat& L, Vec b) {
    const int n = L.rows;
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L(i, k) * b[k];
        b[i] = s / L(i, i);
    }
    return b;
}

Vec lower_t_solve(const Mat& L, Vec b) {
    const int n = L.rows;
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
        b[i] = s / L(i, i);
    }
    return b;
}

Mat lower_solve_matrix(const Mat& L, Mat B) {
    const int n = L.rows;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) {
            const double lik = L(i, k);
            if (lik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) B(i, j) -= lik * B(k, j);
        }
        const double d = L(i, i);
        for (int j = 0; j < B.cols; ++j) B(i, j) /= d;
    }
    return B;
}

Mat lower_t_solve_matrix(const Mat& L, Mat B) {
    const int n = L.rows;
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) {
            const double lki = L(k, i);
            if (lki == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) B(i, j) -= lki * B(k, j);
        }
        const double d = L(i, i);
        for (int j = 0; j < B.cols; ++j) B(i, j) /= d;
    }
    return B;
}

LuFactors lu_factor(Mat A) {
    if (!A.square()) throw std::invalid_argument("lu_factor: not square");
    const int n = A.rows;
    LuFactors f;
    f.piv.resize(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(A(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(A(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        f.piv[k] = p;
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
        if (best == 0.0) {
            f.singular = true;
            continue;
        }
        const double pivot = A(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = A(i, k) / pivot;
            A(i, k) = m;
            if (m == 0.0) continue;
            for (int j = k + 1; j < n; ++j) A(i, j) -= m * A(k, j);
        }
    }
    f.lu = std::move(A);
    return f;
}

Vec lu_solve(const LuFactors& f, Vec b) {
    const int n = f.lu.rows;
    for (int k = 0; k < n; ++k)
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
    for (int i = 1; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= f.lu(i, k) * b[k];
        b[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= f.lu(i, k) * b[k];
        const double d = f.lu(i, i);
        b[i] = (d == 0.0) ? 0.0 : s / d;
    }
    return b;
}

Vec lu_solve_transposed(const LuFactors& f, Vec b) {
    // P A = L U  =>  A^T = U^T L^T P; solve U^T z = b, L^T w = z, x = P^T w
    const int n = f.lu.rows;
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= f.lu(k, i) * b[k];
        const double d = f.lu(i, i);
        b[i] = (d == 0.0) ? 0.0 : s / d;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= f.lu(k, i) * b[k];
        b[i] = s;
    }
    for (int k = n - 1; k >= 0; --k)
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
    return b;
}

void sym_eig(const Mat& A, Vec& evals, Mat& evecs, int max_sweeps) {
    if (!A.square()) throw std::invalid_argument("sym_eig: not square");
    const int n = A.rows;
    Mat M = A;
    evecs = Mat::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += M(p, q) * M(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = M(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double app = M(p, p), aqq = M(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = M(k, p), mkq = M(k, q);
                    M(k, p) = c * mkp - s * mkq;
                    M(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = M(p, k), mqk = M(q, k);
                    M(p, k) = c * mpk - s * mqk;
                    M(q, k) = s * mpk + c * mqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = evecs(k, p), vkq = evecs(k, q);
                    evecs(k, p) = c * vkp - s * vkq;
                    evecs(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    evals.resize(n);
    for (int i = 0; i < n; ++i) evals[i] = M(i, i);
    // Sort ascending, permuting eigenvector columns along.
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return evals[i] < evals[j]; });
    Vec w(n);
    Mat V(n, n);
    for (int j = 0; j < n; ++j) {
        w[j] = evals[idx[j]];
        for (int i = 0; i < n; ++i) V(i, j) = evecs(i, idx[j]);
    }
    evals = std::move(w);
    evecs = std::move(V);
}

double sym_min_eig(const Mat& A) {
    Vec w;
    Mat V;
    sym_eig(A, w, V);
    return w.empty() ? 0.0 : w.front();
}

}  // namespace sosg
