// Compares the serial reference kernel against the OpenMP kernel (GEMM) and
// times a sweep cell serial vs parallel. Thread count follows
// LIFTKIT_THREADS / OMP_NUM_THREADS.

#include <chrono>
#include <cstdio>

#include "liftkit/mat.hpp"
#include "liftkit/parallel.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/sweep.hpp"

using namespace liftkit;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
               .count() /
           reps;
}

} // namespace

int main() {
    std::printf("threads: %d (parallel cutoff dim %d)\n", thread_cap(), kParallelMinDim);
    std::printf("%6s %12s %12s %8s %10s\n", "dim", "serial_ms", "omp_ms", "speedup", "max|diff|");
    for (int dim : {32, 64, 128, 256, 384}) {
        Rng rng(42);
        const Mat a = random_ginibre(rng, dim);
        const Mat b = random_ginibre(rng, dim);
        Mat zs(dim), zp(dim);
        const int reps = dim <= 64 ? 50 : (dim <= 128 ? 10 : 3);
        const double ts = time_ms([&] { zs = mul_serial(a, b); }, reps);
        const double tp = time_ms([&] { zp = mul(a, b); }, reps);
        const double diff = max_abs(zs - zp);
        std::printf("%6d %12.3f %12.3f %8.2f %10.3e\n", dim, ts, tp, ts / tp, diff);
    }

    SweepConfig cfg;
    cfg.corrector = "projection";
    cfg.deltas = {0.01};
    cfg.dims = {48};
    cfg.trials = 32;
    cfg.master_seed = 7;
    const double sweep_ms = time_ms([&] { (void)run_sweep(cfg); }, 1);
    std::printf("sweep cell (projection, dim 48, 32 trials): %.1f ms\n", sweep_ms);
    return 0;
}
