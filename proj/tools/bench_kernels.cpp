// Times the serial reference kernels against the OpenMP paths on the two
// workloads that dominate solve time: dense matmul (the NT sandwiches) and
// full conic solves, whose inner Schur assembly is row-parallel. Both paths
// must produce identical results; the tests assert that, this tool reports
// the speedup.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sosg/sdp.hpp"

using namespace sosg;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
        .count();
}

Mat random_matrix(int r, int c, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(r, c);
    for (auto& v : m.a) v = u(rng);
    return m;
}

// A block-dense conic problem shaped like the certificate programs: several
// medium psd blocks, every constraint touching each of them.
SdpProblem synthetic_sdp(int blocks, int side, int rows, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SdpProblem p;
    p.sense = Sense::Minimize;
    std::vector<int> ids;
    for (int b = 0; b < blocks; ++b) {
        ids.push_back(p.add_block(side));
        for (int i = 0; i < side; ++i) p.objective_entry(ids.back(), i, i, 1.0);
    }
    for (int r = 0; r < rows; ++r) {
        // keep the system feasible: random psd right-hand sides
        const int row = p.add_constraint(2.0 + u(rng));
        for (int b = 0; b < blocks; ++b)
            for (int k = 0; k < side; ++k)
                p.term_entry(row, ids[b], k, k, 1.0 + 0.1 * u(rng));
    }
    return p;
}

// All-scalar problem shaped like the grid LPs.
SdpProblem synthetic_lp(int rows, int cols, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SdpProblem p;
    p.sense = Sense::Minimize;
    std::vector<int> ids;
    for (int k = 0; k < cols; ++k) {
        ids.push_back(p.add_block(1));
        p.objective_entry(ids.back(), 0, 0, u(rng));
    }
    const int norm = p.add_constraint(1.0);
    for (int k = 0; k < cols; ++k) p.term_entry(norm, ids[k], 0, 0, 1.0);
    for (int r = 1; r < rows; ++r) {
        const int row = p.add_constraint(0.5);
        for (int k = 0; k < cols; ++k) p.term_entry(row, ids[k], 0, 0, u(rng));
    }
    return p;
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: yes, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp: no (serial build)\n");
#endif
    std::mt19937 rng(12345);

    {
        const int n = 384;
        Mat A = random_matrix(n, n, rng), B = random_matrix(n, n, rng);
        const double ts = time_best_of(3, [&] { (void)matmul_serial(A, B); });
        const double tp = time_best_of(3, [&] { (void)matmul_omp(A, B); });
        std::printf("matmul %dx%d            serial %8.2f ms   parallel %8.2f ms   x%.2f\n",
                    n, n, ts, tp, ts / tp);
    }
    {
        SdpProblem p = synthetic_sdp(12, 24, 96, rng);
        SdpSettings st;
        st.var_cap = 1 << 20;
        set_parallel_kernels(false);
        double v_serial = 0.0, v_par = 0.0;
        const double ts = time_best_of(2, [&] { v_serial = solve(p, st).objective; });
        set_parallel_kernels(true);
        const double tp = time_best_of(2, [&] { v_par = solve(p, st).objective; });
        std::printf("sdp solve (12 x 24x24)  serial %8.2f ms   parallel %8.2f ms   x%.2f"
                    "   |dv|=%.2e\n",
                    ts, tp, ts / tp, std::fabs(v_serial - v_par));
    }
    {
        SdpProblem p = synthetic_lp(48, 16000, rng);
        SdpSettings st;
        st.var_cap = 1 << 20;
        set_parallel_kernels(false);
        double v_serial = 0.0, v_par = 0.0;
        const double ts = time_best_of(2, [&] { v_serial = solve(p, st).objective; });
        set_parallel_kernels(true);
        const double tp = time_best_of(2, [&] { v_par = solve(p, st).objective; });
        std::printf("lp solve (48 x 16000)   serial %8.2f ms   parallel %8.2f ms   x%.2f"
                    "   |dv|=%.2e\n",
                    ts, tp, ts / tp, std::fabs(v_serial - v_par));
        set_parallel_kernels(true);
    }
    return 0;
}
