#pragma once

namespace liftkit {

// Effective thread count: min(omp_get_max_threads(), LIFTKIT_THREADS).
// LIFTKIT_THREADS=1 forces the serial path everywhere.
int thread_cap();

// Matrix dimension below which the parallel kernels fall back to the
// serial loop (parallelizing tiny GEMMs costs more than it saves).
inline constexpr int kParallelMinDim = 48;

} // namespace liftkit
