// Benchmark: OpenMP kernels vs the serial reference implementations.
// Each kernel is timed best-of-repeats on matched inputs; outputs are
// compared first so a fast-but-wrong kernel cannot slip through.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "tna/kernels.hpp"
#include "tna/rng.hpp"
#include "tna/runtime.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_best(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void fill(tna::Rng& rng, std::vector<double>& v) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
}

void report(const char* name, double flops, double t_omp, double t_ref, double diff) {
    std::printf("%-12s omp %8.3f ms (%7.2f GFLOP/s)   ref %8.3f ms (%7.2f GFLOP/s)   "
                "speedup %5.2fx   max|diff| %.3g\n",
                name, 1e3 * t_omp, flops / t_omp / 1e9, 1e3 * t_ref, flops / t_ref / 1e9,
                t_ref / t_omp, diff);
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    const std::size_t n = 256, m = 512, k = 512;
    std::printf("threads=%d repeats=%d sizes: n=%zu m=%zu k=%zu\n", tna::max_threads(),
                repeats, n, m, k);

    tna::Rng rng(7);
    std::vector<double> X(n * k), W(m * k), D(n * m), bias(m);
    fill(rng, X);
    fill(rng, W);
    fill(rng, D);
    fill(rng, bias);

    {
        std::vector<double> C1(n * m), C2(n * m);
        tna::kern::affine_nt(X.data(), n, k, W.data(), m, bias.data(), C1.data());
        tna::ref::affine_nt(X.data(), n, k, W.data(), m, bias.data(), C2.data());
        const double diff = max_abs_diff(C1, C2);
        const double t1 = time_best(
            [&] { tna::kern::affine_nt(X.data(), n, k, W.data(), m, bias.data(), C1.data()); },
            repeats);
        const double t2 = time_best(
            [&] { tna::ref::affine_nt(X.data(), n, k, W.data(), m, bias.data(), C2.data()); },
            repeats);
        report("affine_nt", 2.0 * n * m * k, t1, t2, diff);
    }
    {
        std::vector<double> G1(m * k), G2(m * k);
        tna::kern::gemm_tn(D.data(), n, m, X.data(), k, G1.data());
        tna::ref::gemm_tn(D.data(), n, m, X.data(), k, G2.data());
        const double diff = max_abs_diff(G1, G2);
        const double t1 = time_best(
            [&] { tna::kern::gemm_tn(D.data(), n, m, X.data(), k, G1.data()); }, repeats);
        const double t2 = time_best(
            [&] { tna::ref::gemm_tn(D.data(), n, m, X.data(), k, G2.data()); }, repeats);
        report("gemm_tn", 2.0 * n * m * k, t1, t2, diff);
    }
    {
        std::vector<double> Y1(n * k), Y2(n * k);
        tna::kern::gemm_nn(D.data(), n, m, W.data(), k, Y1.data());
        tna::ref::gemm_nn(D.data(), n, m, W.data(), k, Y2.data());
        const double diff = max_abs_diff(Y1, Y2);
        const double t1 = time_best(
            [&] { tna::kern::gemm_nn(D.data(), n, m, W.data(), k, Y1.data()); }, repeats);
        const double t2 = time_best(
            [&] { tna::ref::gemm_nn(D.data(), n, m, W.data(), k, Y2.data()); }, repeats);
        report("gemm_nn", 2.0 * n * m * k, t1, t2, diff);
    }
    {
        std::vector<double> a(1 << 21), b(1 << 21);
        fill(rng, a);
        fill(rng, b);
        double s1 = tna::kern::dot(a.data(), b.data(), a.size());
        double s2 = tna::ref::dot(a.data(), b.data(), a.size());
        const double diff = std::abs(s1 - s2);
        const double t1 =
            time_best([&] { s1 = tna::kern::dot(a.data(), b.data(), a.size()); }, repeats);
        const double t2 =
            time_best([&] { s2 = tna::ref::dot(a.data(), b.data(), a.size()); }, repeats);
        report("dot", 2.0 * double(a.size()), t1, t2, diff);
    }
    return 0;
}
