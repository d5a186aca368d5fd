#include "sosg/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sosg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

int SdpProblem::add_free() { return nf_++; }

int SdpProblem::add_block(int side) {
    if (side < 1) throw std::invalid_argument("add_block: side must be >= 1");
    const int id = static_cast<int>(sides_.size());
    sides_.push_back(side);
    if (side == 1) {
        slot_is_scalar_.push_back(true);
        slot_index_.push_back(static_cast<int>(scalar_of_block_.size()));
        scalar_of_block_.push_back(id);
    } else {
        slot_is_scalar_.push_back(false);
        slot_index_.push_back(static_cast<int>(psd_of_block_.size()));
        psd_of_block_.push_back(id);
        psd_sides_.push_back(side);
    }
    return id;
}

void SdpProblem::add_entry(Row& row, int blk, int i, int j, double c) {
    if (blk < 0 || blk >= static_cast<int>(sides_.size()))
        throw std::invalid_argument("unknown block id");
    const int side = sides_[blk];
    if (i < 0 || j < 0 || i >= side || j >= side)
        throw std::invalid_argument("block entry out of range");
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
    if (i < j) std::swap(i, j);
    if (slot_is_scalar_[blk]) {
        row.scalar_terms.push_back({slot_index_[blk], c});
        return;
    }
    // Stored as the entry of a symmetric coefficient matrix: the functional
    // is <Ahat, X> = sum_ii v X_ii + 2 sum_{i>j} v X_ij, so an off-diagonal
    // user coefficient c (meaning c * X_ij once) is stored as c/2.
    const double v = (i == j) ? c : 0.5 * c;
    const int slot = slot_index_[blk];
    for (auto& ch : row.chunks)
        if (ch.blk == slot) {
            ch.e.push_back({i, j, v});
            return;
        }
    row.chunks.push_back({slot, {{i, j, v}}});
}

void SdpProblem::objective_free(int fv, double c) {
    if (fv < 0 || fv >= nf_) throw std::invalid_argument("unknown free variable");
    obj_.free_terms.push_back({fv, c});
}

void SdpProblem::objective_entry(int blk, int i, int j, double c) {
    add_entry(obj_, blk, i, j, c);
}

int SdpProblem::add_constraint(double rhs) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("non-finite right-hand side");
    rows_.push_back({});
    rows_.back().rhs = rhs;
    return static_cast<int>(rows_.size()) - 1;
}

void SdpProblem::term_free(int row, int fv, double c) {
    if (fv < 0 || fv >= nf_) throw std::invalid_argument("unknown free variable");
    rows_.at(row).free_terms.push_back({fv, c});
}

void SdpProblem::term_entry(int row, int blk, int i, int j, double c) {
    add_entry(rows_.at(row), blk, i, j, c);
}

long long SdpProblem::scalar_dimension() const {
    long long n = nf_;
    for (int s : sides_) n += static_cast<long long>(s) * (s + 1) / 2;
    return n;
}

void SdpProblem::dump(std::ostream& os) const {
    os << "# sense=" << (sense == Sense::Maximize ? "max" : "min") << " free=" << nf_
       << " blocks=";
    for (size_t i = 0; i < sides_.size(); ++i) os << (i ? "," : "") << sides_[i];
    os << "\n";
    auto put_row = [&](const Row& r) {
        for (const auto& t : r.free_terms) os << " f" << t.idx << ":" << t.v;
        for (const auto& t : r.scalar_terms)
            os << " s" << scalar_of_block_[t.idx] << ":" << t.v;
        for (const auto& ch : r.chunks)
            for (const auto& e : ch.e)
                os << " b" << psd_of_block_[ch.blk] << "[" << e.i << "," << e.j
                   << "]:" << (e.i == e.j ? e.v : 2.0 * e.v);
    };
    os << "# objective:";
    put_row(obj_);
    os << "\n";
    for (const auto& r : rows_) {
        put_row(r);
        os << " | " << r.rhs << "\n";
    }
}

// ---------------------------------------------------------------------------
// Interior-point solver on the homogeneous self-dual embedding.
//
// Internal form: min c.x  s.t.  A x = b,  x in R^nf x R^nl_+ x (PSD blocks).
// Embedding variables (x, y, s, tau, kappa) satisfy at a solution
//   A x - b tau = 0,   -A^T y + c tau - s = 0,   b.y - c.x - kappa = 0,
// with x, s conic and s zero on the free part. tau > 0 recovers an optimal
// pair; kappa > 0 yields a Farkas certificate.
// ---------------------------------------------------------------------------

namespace {

struct ConeVec {
    Vec sc;               // scalar slots
    std::vector<Mat> bk;  // psd slots
};

double cone_dot(const ConeVec& a, const ConeVec& b) {
    double s = dot(a.sc, b.sc);
    for (size_t k = 0; k < a.bk.size(); ++k) s += dot(a.bk[k].a, b.bk[k].a);
    return s;
}

void cone_axpy(double alpha, const ConeVec& v, ConeVec& out) {
    axpy(alpha, v.sc, out.sc);
    for (size_t k = 0; k < v.bk.size(); ++k) axpy(alpha, v.bk[k].a, out.bk[k].a);
}

struct Work {
    // presolved, scaled problem data
    int nf = 0, nl = 0, m = 0;
    std::vector<int> sides;
    const std::vector<SdpProblem::Row>* rows = nullptr;
    SdpProblem::Row obj;
    Vec b;
    Vec row_scale;
    double c_scale = 1.0, b_scale = 1.0;
    double norm_b = 0.0, norm_c = 0.0;
    double nu = 0.0;  // barrier parameter
    // per psd slot: list of (row id, pointer to entries) for Schur assembly
    std::vector<std::vector<std::pair<int, const std::vector<SdpProblem::Entry>*>>>
        rows_on_block;
};

double sparse_block_dot(const std::vector<SdpProblem::Entry>& e, const Mat& X) {
    double s = 0.0;
    for (const auto& t : e)
        s += (t.i == t.j) ? t.v * X(t.i, t.i) : 2.0 * t.v * X(t.i, t.j);
    return s;
}

double row_value(const SdpProblem::Row& r, const Vec& xf, const ConeVec& x) {
    double s = 0.0;
    for (const auto& t : r.free_terms) s += t.v * xf[t.idx];
    for (const auto& t : r.scalar_terms) s += t.v * x.sc[t.idx];
    for (const auto& ch : r.chunks) s += sparse_block_dot(ch.e, x.bk[ch.blk]);
    return s;
}

// out += w * row, scattered into (free, cone) space.
void row_scatter(const SdpProblem::Row& r, double w, Vec& outf, ConeVec& out) {
    for (const auto& t : r.free_terms) outf[t.idx] += w * t.v;
    for (const auto& t : r.scalar_terms) out.sc[t.idx] += w * t.v;
    for (const auto& ch : r.chunks) {
        Mat& M = out.bk[ch.blk];
        for (const auto& e : ch.e) {
            M(e.i, e.j) += w * e.v;
            if (e.i != e.j) M(e.j, e.i) += w * e.v;
        }
    }
}

struct NtScaling {
    // scalar slots
    Vec h;       // x/s
    Vec lam_sc;  // sqrt(x s)
    // psd slots
    std::vector<Mat> G;     // R R^T, the symmetric scaling (G S G = X)
    std::vector<Mat> R;     // X = R Lam R^T, S = R^{-T} Lam R^{-1}
    std::vector<Mat> Rinv;
    std::vector<Vec> lam;   // scaled-point eigenvalues
};

bool compute_nt(const ConeVec& x, const ConeVec& s, const std::vector<int>& sides,
                NtScaling& nt) {
    const int nl = static_cast<int>(x.sc.size());
    nt.h.resize(nl);
    nt.lam_sc.resize(nl);
    for (int k = 0; k < nl; ++k) {
        if (x.sc[k] <= 0.0 || s.sc[k] <= 0.0) return false;
        nt.h[k] = x.sc[k] / s.sc[k];
        nt.lam_sc[k] = std::sqrt(x.sc[k] * s.sc[k]);
    }
    const size_t nb = x.bk.size();
    nt.G.resize(nb);
    nt.R.resize(nb);
    nt.Rinv.resize(nb);
    nt.lam.resize(nb);
    for (size_t b = 0; b < nb; ++b) {
        const int k = sides[b];
        Mat Lx, Ls;
        if (!cholesky(x.bk[b], Lx) || !cholesky(s.bk[b], Ls)) return false;
        // W2 = Lx^T S Lx has eigenvalues lam^2 with eigenvectors V.
        Mat SLx = matmul(s.bk[b], Lx);
        Mat W2 = matmul(transpose(Lx), SLx);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < i; ++j) {
                double v = 0.5 * (W2(i, j) + W2(j, i));
                W2(i, j) = v;
                W2(j, i) = v;
            }
        Vec ev;
        Mat V;
        sym_eig(W2, ev, V);
        Vec lam(k);
        for (int i = 0; i < k; ++i) {
            if (ev[i] <= 0.0) return false;
            lam[i] = std::sqrt(ev[i]);
        }
        // R = Lx V diag(lam^{-1/2}); Rinv = diag(lam^{1/2}) V^T Lx^{-1}.
        Mat R = matmul(Lx, V);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) R(i, j) /= std::sqrt(lam[j]);
        Mat LtV = lower_t_solve_matrix(Lx, V);  // Lx^{-T} V
        Mat Rinv = transpose(LtV);              // V^T Lx^{-1}
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) Rinv(i, j) *= std::sqrt(lam[i]);
        nt.G[b] = matmul(R, transpose(R));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < i; ++j) {
                double v = 0.5 * (nt.G[b](i, j) + nt.G[b](j, i));
                nt.G[b](i, j) = v;
                nt.G[b](j, i) = v;
            }
        nt.R[b] = std::move(R);
        nt.Rinv[b] = std::move(Rinv);
        nt.lam[b] = std::move(lam);
    }
    return true;
}

ConeVec apply_H(const NtScaling& nt, const ConeVec& v) {
    ConeVec r;
    r.sc.resize(v.sc.size());
    for (size_t k = 0; k < v.sc.size(); ++k) r.sc[k] = nt.h[k] * v.sc[k];
    r.bk.resize(v.bk.size());
    for (size_t b = 0; b < v.bk.size(); ++b) r.bk[b] = sym_sandwich(nt.G[b], v.bk[b]);
    return r;
}

// Schur complement M = A_c H A_c^T over the conic part only.
Mat assemble_schur_serial(const Work& w, const NtScaling& nt) {
    const int m = w.m;
    Mat M(m, m);
    Vec scalar_ws(w.nl, 0.0);
    for (int i = 0; i < m; ++i) {
        const auto& ri = (*w.rows)[i];
        if (!ri.scalar_terms.empty()) {
            for (const auto& t : ri.scalar_terms) scalar_ws[t.idx] = nt.h[t.idx] * t.v;
            for (int j = i; j < m; ++j) {
                const auto& rj = (*w.rows)[j];
                double s = 0.0;
                for (const auto& t : rj.scalar_terms) s += scalar_ws[t.idx] * t.v;
                M(i, j) += s;
            }
            for (const auto& t : ri.scalar_terms) scalar_ws[t.idx] = 0.0;
        }
        for (const auto& ch : ri.chunks) {
            Mat A(w.sides[ch.blk], w.sides[ch.blk]);
            for (const auto& e : ch.e) {
                A(e.i, e.j) += e.v;
                if (e.i != e.j) A(e.j, e.i) += e.v;
            }
            Mat V = sym_sandwich(nt.G[ch.blk], A);
            for (const auto& [j, ej] : w.rows_on_block[ch.blk]) {
                if (j < i) continue;
                M(i, j) += sparse_block_dot(*ej, V);
            }
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) M(i, j) = M(j, i);
    return M;
}

Mat assemble_schur_omp(const Work& w, const NtScaling& nt) {
#ifndef _OPENMP
    return assemble_schur_serial(w, nt);
#else
    const int m = w.m;
    Mat M(m, m);
#pragma omp parallel
    {
        Vec scalar_ws(w.nl, 0.0);
#pragma omp for schedule(dynamic, 4)
        for (int i = 0; i < m; ++i) {
            const auto& ri = (*w.rows)[i];
            if (!ri.scalar_terms.empty()) {
                for (const auto& t : ri.scalar_terms)
                    scalar_ws[t.idx] = nt.h[t.idx] * t.v;
                for (int j = i; j < m; ++j) {
                    const auto& rj = (*w.rows)[j];
                    double s = 0.0;
                    for (const auto& t : rj.scalar_terms) s += scalar_ws[t.idx] * t.v;
                    M(i, j) += s;
                }
                for (const auto& t : ri.scalar_terms) scalar_ws[t.idx] = 0.0;
            }
            for (const auto& ch : ri.chunks) {
                Mat A(w.sides[ch.blk], w.sides[ch.blk]);
                for (const auto& e : ch.e) {
                    A(e.i, e.j) += e.v;
                    if (e.i != e.j) A(e.j, e.i) += e.v;
                }
                Mat V = sym_sandwich(nt.G[ch.blk], A);
                for (const auto& [j, ej] : w.rows_on_block[ch.blk]) {
                    if (j < i) continue;
                    M(i, j) += sparse_block_dot(*ej, V);
                }
            }
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) M(i, j) = M(j, i);
    return M;
#endif
}

Mat assemble_schur(const Work& w, const NtScaling& nt) {
#ifdef _OPENMP
    if (parallel_kernels_enabled() && w.m >= 32) return assemble_schur_omp(w, nt);
#endif
    return assemble_schur_serial(w, nt);
}

// Jordan-product inverse against diag(lam): (L_lam^{-1} W)_ij = 2 W_ij/(l_i+l_j).
Mat jordan_inv(const Vec& lam, const Mat& W) {
    Mat D = W;
    const int k = W.rows;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) D(i, j) = 2.0 * W(i, j) / (lam[i] + lam[j]);
    return D;
}

// Largest step alpha with X + alpha*D staying PSD; Lx is chol(X).
double max_step_psd(const Mat& Lx, const Mat& D) {
    Mat B = lower_solve_matrix(Lx, D);          // Lx^{-1} D
    B = transpose(B);
    B = lower_solve_matrix(Lx, B);              // Lx^{-1} D Lx^{-T}
    for (int i = 0; i < B.rows; ++i)
        for (int j = 0; j < i; ++j) {
            double v = 0.5 * (B(i, j) + B(j, i));
            B(i, j) = v;
            B(j, i) = v;
        }
    const double me = sym_min_eig(B);
    if (me >= -1e-14) return kInf;
    return -1.0 / me;
}

struct State {
    Vec xf;
    ConeVec x, s;
    Vec y;
    double tau = 1.0, kappa = 1.0;
};

struct Direction {
    Vec xf;
    ConeVec x, s;
    Vec y;
    double tau = 0.0, kappa = 0.0;
};

struct KktSystem {
    Mat K;  // exact, unregularized
    Vec D;  // symmetric Jacobi equilibration, factored as D K D
    LuFactors lu;
    int nf, m;

    // Refinement against the exact matrix recovers the accuracy lost to the
    // regularization, the equilibration, and cancellation once the path
    // parameter is small.
    Vec solve(const Vec& rhs_f, const Vec& rhs_m) const {
        Vec q(nf + m);
        for (int i = 0; i < nf; ++i) q[i] = rhs_f[i];
        for (int i = 0; i < m; ++i) q[nf + i] = rhs_m[i];
        Vec u = scaled_solve(q);
        double last = 1e300;
        for (int round = 0; round < 3; ++round) {
            Vec r = matvec(K, u);
            for (size_t i = 0; i < r.size(); ++i) r[i] = q[i] - r[i];
            const double rn = norm2(r);
            if (rn >= last || rn == 0.0) break;
            last = rn;
            Vec du = scaled_solve(r);
            axpy(1.0, du, u);
        }
        return u;
    }

  private:
    Vec scaled_solve(Vec q) const {
        const int dim = nf + m;
        for (int i = 0; i < dim; ++i) q[i] *= D[i];
        Vec v = lu_solve(lu, std::move(q));
        for (int i = 0; i < dim; ++i) v[i] *= D[i];
        return v;
    }
};

}  // namespace

SdpSolution solve(const SdpProblem& prob, const SdpSettings& settings_in) {
    SdpSettings st = settings_in;
    if (const char* env = std::getenv("SOSG_MAX_ITER")) {
        const int v = std::atoi(env);
        if (v > 0) st.max_iter = v;
    }
    if (prob.scalar_dimension() > st.var_cap)
        throw std::invalid_argument("sdp: problem exceeds the configured variable cap");
    if (prob.constraint_count() == 0)
        throw std::invalid_argument("sdp: at least one constraint is required");

    // --- presolve: row equilibration plus scalar b/c scaling -------------
    Work w;
    w.nf = prob.free_count();
    w.nl = prob.scalar_count();
    w.m = prob.constraint_count();
    w.sides = prob.psd_sides();

    const double sgn = (prob.sense == Sense::Maximize) ? -1.0 : 1.0;
    std::vector<SdpProblem::Row> rows = prob.rows();
    w.obj = prob.objective_row();
    for (auto& t : w.obj.free_terms) t.v *= sgn;
    for (auto& t : w.obj.scalar_terms) t.v *= sgn;
    for (auto& ch : w.obj.chunks)
        for (auto& e : ch.e) e.v *= sgn;

    w.row_scale.assign(w.m, 1.0);
    for (int i = 0; i < w.m; ++i) {
        double mx = 0.0;
        for (auto& t : rows[i].free_terms) mx = std::max(mx, std::fabs(t.v));
        for (auto& t : rows[i].scalar_terms) mx = std::max(mx, std::fabs(t.v));
        for (auto& ch : rows[i].chunks)
            for (auto& e : ch.e) mx = std::max(mx, std::fabs(e.v));
        if (mx <= 0.0) mx = 1.0;
        w.row_scale[i] = mx;
        const double inv = 1.0 / mx;
        for (auto& t : rows[i].free_terms) t.v *= inv;
        for (auto& t : rows[i].scalar_terms) t.v *= inv;
        for (auto& ch : rows[i].chunks)
            for (auto& e : ch.e) e.v *= inv;
        rows[i].rhs *= inv;
    }
    w.b.resize(w.m);
    double bmax = 0.0, cmax = 0.0;
    for (int i = 0; i < w.m; ++i) bmax = std::max(bmax, std::fabs(rows[i].rhs));
    for (auto& t : w.obj.free_terms) cmax = std::max(cmax, std::fabs(t.v));
    for (auto& t : w.obj.scalar_terms) cmax = std::max(cmax, std::fabs(t.v));
    for (auto& ch : w.obj.chunks)
        for (auto& e : ch.e) cmax = std::max(cmax, std::fabs(e.v));
    w.b_scale = std::max(1.0, bmax);
    w.c_scale = std::max(1.0, cmax);
    for (int i = 0; i < w.m; ++i) {
        rows[i].rhs /= w.b_scale;
        w.b[i] = rows[i].rhs;
    }
    for (auto& t : w.obj.free_terms) t.v /= w.c_scale;
    for (auto& t : w.obj.scalar_terms) t.v /= w.c_scale;
    for (auto& ch : w.obj.chunks)
        for (auto& e : ch.e) e.v /= w.c_scale;
    w.rows = &rows;

    w.rows_on_block.assign(w.sides.size(), {});
    for (int i = 0; i < w.m; ++i)
        for (const auto& ch : rows[i].chunks)
            w.rows_on_block[ch.blk].push_back({i, &ch.e});

    w.norm_b = norm2(w.b);
    {
        Vec cf(w.nf, 0.0);
        ConeVec cc;
        cc.sc.assign(w.nl, 0.0);
        cc.bk.clear();
        for (int s : w.sides) cc.bk.emplace_back(s, s);
        row_scatter(w.obj, 1.0, cf, cc);
        w.norm_c = std::sqrt(dot(cf, cf) + cone_dot(cc, cc));
    }
    w.nu = w.nl;
    for (int s : w.sides) w.nu += s;

    // Objective as (free, cone) vectors for repeated use.
    Vec c_f(w.nf, 0.0);
    ConeVec c_c;
    c_c.sc.assign(w.nl, 0.0);
    for (int s : w.sides) c_c.bk.emplace_back(s, s);
    row_scatter(w.obj, 1.0, c_f, c_c);

    auto cone_identity = [&]() {
        ConeVec v;
        v.sc.assign(w.nl, 1.0);
        for (int s : w.sides) v.bk.push_back(Mat::identity(s));
        return v;
    };

    State cur;
    cur.xf.assign(w.nf, 0.0);
    cur.x = cone_identity();
    cur.s = cone_identity();
    cur.y.assign(w.m, 0.0);

    auto cone_clone_zero = [&]() {
        ConeVec v;
        v.sc.assign(w.nl, 0.0);
        for (int s : w.sides) v.bk.emplace_back(s, s);
        return v;
    };

    auto obj_dot = [&](const Vec& xf, const ConeVec& xc) {
        return dot(c_f, xf) + cone_dot(c_c, xc);
    };

    SdpSolution sol;
    sol.free_values.assign(w.nf, 0.0);

    auto finalize_point = [&](const State& S_, SdpStatus status, double scale) {
        // scale multiplies the raw embedding point (1/tau for Optimal).
        sol.status = status;
        sol.free_values.assign(w.nf, 0.0);
        for (int i = 0; i < w.nf; ++i) sol.free_values[i] = S_.xf[i] * scale * w.b_scale;
        sol.block_values.clear();
        sol.dual_blocks.clear();
        const auto& sides_pub = prob.blocks();
        for (size_t blk = 0; blk < sides_pub.size(); ++blk) {
            const int slot = prob.block_slot(static_cast<int>(blk));
            if (prob.block_is_scalar(static_cast<int>(blk))) {
                Mat v(1, 1), d(1, 1);
                v(0, 0) = S_.x.sc[slot] * scale * w.b_scale;
                d(0, 0) = S_.s.sc[slot] * scale * w.c_scale;
                sol.block_values.push_back(v);
                sol.dual_blocks.push_back(d);
            } else {
                Mat v = S_.x.bk[slot];
                Mat d = S_.s.bk[slot];
                for (auto& t : v.a) t *= scale * w.b_scale;
                for (auto& t : d.a) t *= scale * w.c_scale;
                sol.block_values.push_back(std::move(v));
                sol.dual_blocks.push_back(std::move(d));
            }
        }
        sol.y.assign(w.m, 0.0);
        for (int i = 0; i < w.m; ++i)
            sol.y[i] = sgn * S_.y[i] * scale * w.c_scale / w.row_scale[i];
    };

    double mu0 = (cone_dot(cur.x, cur.s) + cur.tau * cur.kappa) / (w.nu + 1.0);

    for (int iter = 0; iter <= st.max_iter; ++iter) {
        // residuals of the embedding
        Vec Ax(w.m);
        for (int i = 0; i < w.m; ++i) Ax[i] = row_value(rows[i], cur.xf, cur.x);
        Vec rp(w.m);
        for (int i = 0; i < w.m; ++i) rp[i] = Ax[i] - w.b[i] * cur.tau;  // want 0

        Vec ATy_f(w.nf, 0.0);
        ConeVec ATy_c = cone_clone_zero();
        for (int i = 0; i < w.m; ++i) row_scatter(rows[i], cur.y[i], ATy_f, ATy_c);
        Vec rd_f(w.nf);
        for (int i = 0; i < w.nf; ++i) rd_f[i] = -ATy_f[i] + c_f[i] * cur.tau;
        ConeVec rd_c = cone_clone_zero();
        cone_axpy(-1.0, ATy_c, rd_c);
        cone_axpy(cur.tau, c_c, rd_c);
        cone_axpy(-1.0, cur.s, rd_c);

        const double cx = obj_dot(cur.xf, cur.x);
        const double by = dot(w.b, cur.y);
        const double rg = by - cx - cur.kappa;  // want 0

        const double mu = (cone_dot(cur.x, cur.s) + cur.tau * cur.kappa) / (w.nu + 1.0);

        // --- termination tests -------------------------------------------
        // residuals are measured relative to both the data and the candidate
        // point, the usual convention when solution norms can be large
        const double tau = cur.tau;
        const double pres = norm2(rp) / tau / (1.0 + std::max(w.norm_b, norm2(Ax) / tau));
        double dres;
        {
            double n2 = dot(rd_f, rd_f) + cone_dot(rd_c, rd_c);
            double aty2 = dot(ATy_f, ATy_f) + cone_dot(ATy_c, ATy_c);
            double sn2 = cone_dot(cur.s, cur.s);
            const double scale_d =
                std::max(w.norm_c, (std::sqrt(aty2) + std::sqrt(sn2)) / tau);
            dres = std::sqrt(n2) / tau / (1.0 + scale_d);
        }
        const double pobj = cx / tau, dobj = by / tau;
        const double relgap = std::fabs(pobj - dobj) / (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));
        const double cgap = cone_dot(cur.x, cur.s) / (tau * tau) /
                            (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));

        if (st.verbose)
            std::cerr << "iter " << iter << " mu=" << mu << " pres=" << pres
                      << " dres=" << dres << " gap=" << relgap << " tau=" << tau
                      << " kappa=" << cur.kappa << "\n";

        if (pres <= st.feas_tol && dres <= st.feas_tol && (relgap <= st.gap_tol || cgap <= st.gap_tol)) {
            finalize_point(cur, SdpStatus::Optimal, 1.0 / tau);
            sol.objective = sgn * pobj * w.c_scale * w.b_scale;
            sol.iterations = iter;
            sol.primal_residual = pres;
            sol.dual_residual = dres;
            sol.gap = relgap;
            return sol;
        }

        // certificates of infeasibility / unboundedness
        if (by > 0.0) {
            double n2 = 0.0;
            {
                Vec tf(w.nf, 0.0);
                for (int i = 0; i < w.nf; ++i) tf[i] = ATy_f[i];
                ConeVec tc = cone_clone_zero();
                cone_axpy(1.0, ATy_c, tc);
                cone_axpy(1.0, cur.s, tc);
                n2 = std::sqrt(dot(tf, tf) + cone_dot(tc, tc));
            }
            if (n2 <= st.feas_tol * by * std::max(1.0, w.norm_c) &&
                by > 1e-10 * std::max(1.0, norm2(cur.y))) {
                finalize_point(cur, SdpStatus::Infeasible, 1.0 / by);
                sol.objective = 0.0;
                sol.iterations = iter;
                return sol;
            }
        }
        if (cx < 0.0) {
            const double nAx = norm2(Ax);
            if (nAx <= st.feas_tol * (-cx) * std::max(1.0, w.norm_b)) {
                finalize_point(cur, SdpStatus::Unbounded, 1.0 / (-cx));
                sol.objective = 0.0;
                sol.iterations = iter;
                return sol;
            }
        }
        // objective divergence guard once feasible
        if (pres <= st.feas_tol && std::fabs(pobj) * w.c_scale * w.b_scale > st.unbounded_threshold) {
            finalize_point(cur, SdpStatus::Unbounded, 1.0);
            sol.objective = 0.0;
            sol.iterations = iter;
            return sol;
        }
        if (iter == st.max_iter) break;
        if (mu <= 1e-14 * mu0 || tau <= 1e-12 * std::max(1.0, cur.kappa)) break;

        // --- NT scaling ----------------------------------------------------
        NtScaling nt;
        if (!compute_nt(cur.x, cur.s, w.sides, nt)) break;

        Mat M = assemble_schur(w, nt);
        const int dim = w.nf + w.m;
        Mat K(dim, dim);
        for (int i = 0; i < w.m; ++i)
            for (int j = 0; j < w.m; ++j) K(w.nf + i, w.nf + j) = M(i, j);
        for (int i = 0; i < w.m; ++i)
            for (const auto& t : rows[i].free_terms) {
                K(w.nf + i, t.idx) = t.v;
                K(t.idx, w.nf + i) = t.v;
            }
        // symmetric equilibration tames the huge dynamic range of the
        // scaled Schur complement near the solution
        Vec D(dim, 1.0);
        for (int i = 0; i < dim; ++i) {
            double rownorm = 0.0;
            for (int j = 0; j < dim; ++j) rownorm = std::max(rownorm, std::fabs(K(i, j)));
            D[i] = (rownorm > 0.0) ? 1.0 / std::sqrt(rownorm) : 1.0;
        }
        Mat Kreg(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) Kreg(i, j) = D[i] * K(i, j) * D[j];
        // light Tikhonov so rank-deficient rows stay factorable; refinement
        // in KktSystem::solve works against the exact matrix
        const double reg = 1e-13;
        for (int i = 0; i < w.nf; ++i) Kreg(i, i) -= reg;
        for (int i = 0; i < w.m; ++i) Kreg(w.nf + i, w.nf + i) += reg;
        LuFactors kf = lu_factor(std::move(Kreg));
        if (kf.singular) break;
        KktSystem kkt{std::move(K), std::move(D), std::move(kf), w.nf, w.m};

        // Hc and A Hc (fixed per iteration)
        ConeVec Hc = apply_H(nt, c_c);
        Vec AHc(w.m);
        for (int i = 0; i < w.m; ++i) {
            double s = 0.0;
            for (const auto& t : rows[i].scalar_terms) s += t.v * Hc.sc[t.idx];
            for (const auto& ch : rows[i].chunks) s += sparse_block_dot(ch.e, Hc.bk[ch.blk]);
            AHc[i] = s;
        }
        const double cHc = cone_dot(c_c, Hc);

        // q1 solve: K [dxf; dy] = [c_f; AHc + b]
        Vec q1m(w.m);
        for (int i = 0; i < w.m; ++i) q1m[i] = AHc[i] + w.b[i];
        Vec u1 = kkt.solve(c_f, q1m);

        auto solve_direction = [&](double sigma, const Direction* aff) {
            Direction d;
            d.xf.assign(w.nf, 0.0);
            d.x = cone_clone_zero();
            d.s = cone_clone_zero();
            d.y.assign(w.m, 0.0);
            const double eta = 1.0 - sigma;

            // complementarity right-hand sides
            ConeVec rhs4 = cone_clone_zero();
            for (int k = 0; k < w.nl; ++k) {
                double dd = sigma * mu - cur.x.sc[k] * cur.s.sc[k];
                if (aff) dd -= aff->x.sc[k] * aff->s.sc[k];
                rhs4.sc[k] = dd / cur.s.sc[k];
            }
            for (size_t bI = 0; bI < w.sides.size(); ++bI) {
                const int k = w.sides[bI];
                Mat dmat(k, k);
                for (int i = 0; i < k; ++i)
                    dmat(i, i) = sigma * mu - nt.lam[bI][i] * nt.lam[bI][i];
                if (aff) {
                    // scaled cross term 0.5 (U W + W U)
                    Mat U = matmul(matmul(nt.Rinv[bI], aff->x.bk[bI]), transpose(nt.Rinv[bI]));
                    Mat Wm = matmul(matmul(transpose(nt.R[bI]), aff->s.bk[bI]), nt.R[bI]);
                    Mat UW = matmul(U, Wm);
                    for (int i = 0; i < k; ++i)
                        for (int j = 0; j < k; ++j)
                            dmat(i, j) -= 0.5 * (UW(i, j) + UW(j, i));
                }
                Mat D = jordan_inv(nt.lam[bI], dmat);
                rhs4.bk[bI] = matmul(matmul(nt.R[bI], D), transpose(nt.R[bI]));
            }
            const double rhs5 = sigma * mu - cur.tau * cur.kappa -
                                (aff ? aff->tau * aff->kappa : 0.0);

            // linear residual targets
            Vec rhs1(w.m);
            for (int i = 0; i < w.m; ++i) rhs1[i] = -eta * rp[i];
            Vec rhs2f(w.nf);
            for (int i = 0; i < w.nf; ++i) rhs2f[i] = -eta * rd_f[i];
            ConeVec rhs2c = cone_clone_zero();
            cone_axpy(-eta, rd_c, rhs2c);
            const double rhs3 = -eta * rg;

            // r1hat = rhs1 - A(rhs4 + H rhs2c)
            ConeVec tmp = cone_clone_zero();
            cone_axpy(1.0, rhs4, tmp);
            ConeVec H2 = apply_H(nt, rhs2c);
            cone_axpy(1.0, H2, tmp);
            Vec r1hat(w.m);
            for (int i = 0; i < w.m; ++i) {
                double s = 0.0;
                for (const auto& t : rows[i].scalar_terms) s += t.v * tmp.sc[t.idx];
                for (const auto& ch : rows[i].chunks)
                    s += sparse_block_dot(ch.e, tmp.bk[ch.blk]);
                r1hat[i] = rhs1[i] - s;
            }
            Vec q0f(w.nf);
            for (int i = 0; i < w.nf; ++i) q0f[i] = -rhs2f[i];
            Vec u0 = kkt.solve(q0f, r1hat);

            // dtau from the gap equation
            const double ccT = cone_dot(c_c, tmp);  // c_c.(rhs4 + H rhs2c)
            double num = rhs3 + ccT + rhs5 / cur.tau;
            double den = cHc + cur.kappa / cur.tau;
            {
                double b_u0 = 0.0, b_u1 = 0.0, cf_u0 = 0.0, cf_u1 = 0.0;
                double aw_u0 = 0.0, aw_u1 = 0.0;
                for (int i = 0; i < w.m; ++i) {
                    b_u0 += w.b[i] * u0[w.nf + i];
                    b_u1 += w.b[i] * u1[w.nf + i];
                    aw_u0 += AHc[i] * u0[w.nf + i];
                    aw_u1 += AHc[i] * u1[w.nf + i];
                }
                for (int i = 0; i < w.nf; ++i) {
                    cf_u0 += c_f[i] * u0[i];
                    cf_u1 += c_f[i] * u1[i];
                }
                num += -b_u0 + cf_u0 + aw_u0;
                den += b_u1 - cf_u1 - aw_u1;
            }
            if (std::fabs(den) < 1e-300) den = 1e-300;
            d.tau = num / den;

            for (int i = 0; i < w.nf; ++i) d.xf[i] = u0[i] + d.tau * u1[i];
            for (int i = 0; i < w.m; ++i) d.y[i] = u0[w.nf + i] + d.tau * u1[w.nf + i];

            // ds = -A^T dy + c dtau - rhs2;  dx = rhs4 - H ds
            ConeVec ATdy = cone_clone_zero();
            Vec ATdy_f(w.nf, 0.0);
            for (int i = 0; i < w.m; ++i) row_scatter(rows[i], d.y[i], ATdy_f, ATdy);
            cone_axpy(-1.0, ATdy, d.s);
            cone_axpy(d.tau, c_c, d.s);
            cone_axpy(-1.0, rhs2c, d.s);
            ConeVec Hds = apply_H(nt, d.s);
            cone_axpy(1.0, rhs4, d.x);
            cone_axpy(-1.0, Hds, d.x);
            d.kappa = (rhs5 - cur.kappa * d.tau) / cur.tau;
            for (auto& B : d.x.bk)
                for (int i = 0; i < B.rows; ++i)
                    for (int j = 0; j < i; ++j) {
                        double v = 0.5 * (B(i, j) + B(j, i));
                        B(i, j) = v;
                        B(j, i) = v;
                    }
            for (auto& B : d.s.bk)
                for (int i = 0; i < B.rows; ++i)
                    for (int j = 0; j < i; ++j) {
                        double v = 0.5 * (B(i, j) + B(j, i));
                        B(i, j) = v;
                        B(j, i) = v;
                    }
            return d;
        };

        auto max_step = [&](const Direction& d) {
            double a = kInf;
            for (int k = 0; k < w.nl; ++k) {
                if (d.x.sc[k] < 0.0) a = std::min(a, -cur.x.sc[k] / d.x.sc[k]);
                if (d.s.sc[k] < 0.0) a = std::min(a, -cur.s.sc[k] / d.s.sc[k]);
            }
            for (size_t bI = 0; bI < w.sides.size(); ++bI) {
                Mat Lx, Ls;
                if (!cholesky(cur.x.bk[bI], Lx) || !cholesky(cur.s.bk[bI], Ls)) return 0.0;
                a = std::min(a, max_step_psd(Lx, d.x.bk[bI]));
                a = std::min(a, max_step_psd(Ls, d.s.bk[bI]));
            }
            if (d.tau < 0.0) a = std::min(a, -cur.tau / d.tau);
            if (d.kappa < 0.0) a = std::min(a, -cur.kappa / d.kappa);
            return a;
        };

        Direction aff = solve_direction(0.0, nullptr);
        double a_aff = std::min(1.0, max_step(aff));
        // mu after the affine step
        double mu_aff;
        {
            State t = cur;
            axpy(a_aff, aff.xf, t.xf);
            cone_axpy(a_aff, aff.x, t.x);
            cone_axpy(a_aff, aff.s, t.s);
            t.tau += a_aff * aff.tau;
            t.kappa += a_aff * aff.kappa;
            mu_aff = (cone_dot(t.x, t.s) + t.tau * t.kappa) / (w.nu + 1.0);
        }
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, std::max(1e-8, sigma));
        // centering safeguard: when the tau*kappa product drifts away from
        // the cone complementarity, a plain Mehrotra step spirals tau down;
        // a stronger centering component rebalances the pair
        const double tk_ratio = cur.tau * cur.kappa / mu;
        if (tk_ratio > 10.0 || tk_ratio < 0.1) sigma = std::max(sigma, 0.5);

        Direction comb = solve_direction(sigma, &aff);
        double a = 0.99 * max_step(comb);
        a = std::min(1.0, a);
        if (!(a > 0.0) || !std::isfinite(a)) break;

        axpy(a, comb.xf, cur.xf);
        cone_axpy(a, comb.x, cur.x);
        cone_axpy(a, comb.s, cur.s);
        axpy(a, comb.y, cur.y);
        cur.tau += a * comb.tau;
        cur.kappa += a * comb.kappa;
        sol.iterations = iter + 1;
    }

    // Ran out of iterations or the embedding collapsed without a clean
    // certificate. The gap often converges well past the point where the
    // accumulated iterate error keeps the raw equality residual a hair above
    // tolerance; a least-norm projection onto A x = b tau recovers it.
    {
        Vec Ax(w.m);
        for (int i = 0; i < w.m; ++i) Ax[i] = row_value(rows[i], cur.xf, cur.x);
        Vec r(w.m);
        for (int i = 0; i < w.m; ++i) r[i] = w.b[i] * cur.tau - Ax[i];
        if (norm2(r) <= 1e-4 * cur.tau * (1.0 + w.norm_b)) {
            // Gram matrix of the constraint rows over all coordinates
            Mat AAt(w.m, w.m);
            for (int i = 0; i < w.m; ++i) {
                Vec fi(w.nf, 0.0);
                ConeVec ci;
                ci.sc.assign(w.nl, 0.0);
                for (int s : w.sides) ci.bk.emplace_back(s, s);
                row_scatter(rows[i], 1.0, fi, ci);
                for (int j = i; j < w.m; ++j) {
                    AAt(i, j) = row_value(rows[j], fi, ci);
                    AAt(j, i) = AAt(i, j);
                }
            }
            double dmax = 1.0;
            for (int i = 0; i < w.m; ++i) dmax = std::max(dmax, AAt(i, i));
            for (int i = 0; i < w.m; ++i) AAt(i, i) += 1e-13 * dmax;
            Mat L;
            if (cholesky(AAt, L)) {
                for (int round = 0; round < 2; ++round) {
                    Vec nu = lower_t_solve(L, lower_solve(L, r));
                    for (int i = 0; i < w.m; ++i)
                        row_scatter(rows[i], nu[i], cur.xf, cur.x);
                    for (int i = 0; i < w.m; ++i)
                        r[i] = w.b[i] * cur.tau - row_value(rows[i], cur.xf, cur.x);
                }
                // re-evaluate optimality at the polished point
                Vec rp2(w.m);
                for (int i = 0; i < w.m; ++i)
                    rp2[i] = row_value(rows[i], cur.xf, cur.x) - w.b[i] * cur.tau;
                Vec ATy_f(w.nf, 0.0);
                ConeVec ATy_c;
                ATy_c.sc.assign(w.nl, 0.0);
                for (int s : w.sides) ATy_c.bk.emplace_back(s, s);
                for (int i = 0; i < w.m; ++i) row_scatter(rows[i], cur.y[i], ATy_f, ATy_c);
                Vec rd_f(w.nf);
                for (int i = 0; i < w.nf; ++i) rd_f[i] = -ATy_f[i] + c_f[i] * cur.tau;
                ConeVec rd_c;
                rd_c.sc.assign(w.nl, 0.0);
                for (int s : w.sides) rd_c.bk.emplace_back(s, s);
                cone_axpy(-1.0, ATy_c, rd_c);
                cone_axpy(cur.tau, c_c, rd_c);
                cone_axpy(-1.0, cur.s, rd_c);
                const double tau = cur.tau;
                const double cx = obj_dot(cur.xf, cur.x);
                const double by = dot(w.b, cur.y);
                const double pres =
                    norm2(rp2) / tau / (1.0 + std::max(w.norm_b, norm2(Ax) / tau));
                double aty2 = dot(ATy_f, ATy_f) + cone_dot(ATy_c, ATy_c);
                double sn2 = cone_dot(cur.s, cur.s);
                const double dres =
                    std::sqrt(dot(rd_f, rd_f) + cone_dot(rd_c, rd_c)) / tau /
                    (1.0 + std::max(w.norm_c, (std::sqrt(aty2) + std::sqrt(sn2)) / tau));
                const double pobj = cx / tau, dobj = by / tau;
                const double relgap = std::fabs(pobj - dobj) /
                                      (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));
                const double cgap = cone_dot(cur.x, cur.s) / (tau * tau) /
                                    (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));
                if (pres <= st.feas_tol && dres <= st.feas_tol &&
                    (relgap <= st.gap_tol || cgap <= st.gap_tol)) {
                    finalize_point(cur, SdpStatus::Optimal, 1.0 / tau);
                    sol.objective = sgn * pobj * w.c_scale * w.b_scale;
                    sol.primal_residual = pres;
                    sol.dual_residual = dres;
                    sol.gap = relgap;
                    return sol;
                }
            }
        }
    }
    {
        const double by = dot(w.b, cur.y);
        Vec ATy_f(w.nf, 0.0);
        ConeVec ATy_c;
        ATy_c.sc.assign(w.nl, 0.0);
        for (int s : w.sides) ATy_c.bk.emplace_back(s, s);
        for (int i = 0; i < w.m; ++i) row_scatter(rows[i], cur.y[i], ATy_f, ATy_c);
        if (by > 0.0) {
            ConeVec tc = ATy_c;
            cone_axpy(1.0, cur.s, tc);
            const double n2 = std::sqrt(dot(ATy_f, ATy_f) + cone_dot(tc, tc));
            if (n2 <= 1e-6 * by * std::max(1.0, w.norm_c)) {
                finalize_point(cur, SdpStatus::Infeasible, 1.0 / by);
                return sol;
            }
        }
        const double cx = obj_dot(cur.xf, cur.x);
        if (cx < 0.0) {
            Vec Ax(w.m);
            for (int i = 0; i < w.m; ++i) Ax[i] = row_value(rows[i], cur.xf, cur.x);
            if (norm2(Ax) <= 1e-6 * (-cx) * std::max(1.0, w.norm_b)) {
                finalize_point(cur, SdpStatus::Unbounded, 1.0 / (-cx));
                return sol;
            }
        }
    }
    sol.status = SdpStatus::NumericalFailure;
    return sol;
}

}  // namespace sosg
