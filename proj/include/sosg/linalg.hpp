#pragma once

// Small dense linear-algebra kernels used by the conic solver and the
// certificate checks. Matrices are row-major. Hot kernels (matmul, Schur
// assembly in sdp.cpp) have an OpenMP-parallel path next to the serial
// reference; both must produce identical results up to summation order,
// which the tests and the bench tool compare.

#include <cstddef>
#include <span>
#include <vector>

namespace sosg {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n);
    bool square() const { return rows == cols; }
};

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha * x

Vec matvec(const Mat& A, const Vec& x);
Vec matvec_t(const Mat& A, const Vec& x);  // A^T x

Mat transpose(const Mat& A);

// C = A * B. matmul() dispatches to the OpenMP kernel when worthwhile.
Mat matmul_serial(const Mat& A, const Mat& B);
Mat matmul_omp(const Mat& A, const Mat& B);
Mat matmul(const Mat& A, const Mat& B);

// Symmetric congruence C = G * S * G with S, G symmetric (used for the
// Nesterov-Todd sandwich). Only symmetry of the result is exploited.
Mat sym_sandwich(const Mat& G, const Mat& S);

// A = L L^T, L lower triangular. Returns false when a pivot drops below
// `tol` times the largest diagonal entry (matrix not numerically PD).
bool cholesky(const Mat& A, Mat& L, double tol = 0.0);

Vec lower_solve(const Mat& L, Vec b);    // solves L z = b
Vec lower_t_solve(const Mat& L, Vec b);  // solves L^T z = b

// In-place row operations for L^{-1} B and L^{-T} B.
Mat lower_solve_matrix(const Mat& L, Mat B);
Mat lower_t_solve_matrix(const Mat& L, Mat B);

struct LuFactors {
    Mat lu;
    std::vector<int> piv;
    bool singular = false;
};

LuFactors lu_factor(Mat A);
Vec lu_solve(const LuFactors& f, Vec b);
// Solves A^T x = b using the factorization of A.
Vec lu_solve_transposed(const LuFactors& f, Vec b);

// Cyclic Jacobi eigendecomposition of a symmetric matrix:
// A = V diag(w) V^T, eigenvectors in the columns of V, w ascending.
void sym_eig(const Mat& A, Vec& evals, Mat& evecs, int max_sweeps = 64);
double sym_min_eig(const Mat& A);

// Whether parallel kernels are enabled (true by default when compiled
// with OpenMP; the bench tool and tests flip this to compare paths).
bool parallel_kernels_enabled();
void set_parallel_kernels(bool on);

}  // namespace sosg
