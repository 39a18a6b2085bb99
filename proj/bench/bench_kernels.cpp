// Timing comparison between the serial reference kernels and the OpenMP
// kernels, plus the naive-vs-rank-one pruning comparison at a small size.
// Thread count comes from KOOPMAN_PRUNE_THREADS (default 1).

#include <chrono>
#include <cstdio>

#include "kprune/bench.hpp"
#include "kprune/kernels.hpp"
#include "kprune/parallel.hpp"
#include "kprune/synthetic.hpp"

using namespace kprune;

namespace {

template <typename F>
double time_s(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_kernel_pair(const char* name, double serial_s, double omp_s) {
    std::printf("%-24s serial %9.4f s   omp(%d) %9.4f s   speedup %5.2fx\n", name, serial_s,
                parallel::thread_count(), omp_s, serial_s / omp_s);
}

}  // namespace

int main() {
    const Index n = 20000, s = 128;
    const Matrix a = random_matrix(3, n, s);
    const Matrix b = random_matrix(4, n, s);
    const Matrix small = random_matrix(5, s, s);

    std::printf("kernel benchmark: N = %lld, s = %lld, threads = %d\n",
                static_cast<long long>(n), static_cast<long long>(s),
                parallel::thread_count());

    Matrix r1, r2;
    bench_kernel_pair("multiply_at_b",
                      time_s([&] { r1 = kernels::serial::multiply_at_b(a, b); }),
                      time_s([&] { r2 = kernels::multiply_at_b(a, b); }));
    std::printf("  max deviation %g\n", (r1 - r2).cwiseAbs().maxCoeff());

    bench_kernel_pair("multiply_ab",
                      time_s([&] { r1 = kernels::serial::multiply_ab(a, small); }),
                      time_s([&] { r2 = kernels::multiply_ab(a, small); }));
    std::printf("  max deviation %g\n", (r1 - r2).cwiseAbs().maxCoeff());

    Matrix q1, rr1, q2, rr2;
    bench_kernel_pair("thin_householder_qr",
                      time_s([&] { kernels::serial::thin_householder_qr(a, q1, rr1); }),
                      time_s([&] { kernels::thin_householder_qr(a, q2, rr2); }));
    std::printf("  max deviation %g\n", (q1 - q2).cwiseAbs().maxCoeff());

    kernels::PivotedQR p1, p2;
    bench_kernel_pair("pivoted_qr",
                      time_s([&] { p1 = kernels::serial::pivoted_qr(a, 1e-10); }),
                      time_s([&] { p2 = kernels::pivoted_qr(a, 1e-10); }));
    std::printf("  max deviation %g\n", (p1.q - p2.q).cwiseAbs().maxCoeff());

    std::printf("\npruning benchmark (dim 53, Van der Pol data)\n");
    BenchOptions opt;
    opt.repeats = 1;
    const auto rows = timing_harness({53}, {"spv", "spv_fast", "mpv", "mpv_fast", "hybrid_fast"}, opt);
    for (const auto& row : rows)
        std::printf("  %-12s %9.4f s (first computation %9.4f s)\n", row.mode.c_str(),
                    row.wall_seconds, row.first_comp_seconds);
    return 0;
}
