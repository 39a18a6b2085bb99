#pragma once

namespace kprune::parallel {

// Number of worker threads for the OpenMP kernels. Resolved once from the
// KOOPMAN_PRUNE_THREADS environment variable (default 1, i.e. serial) and
// overridable at runtime for tests and benchmarks.
//
// Every kernel partitions whole output elements between threads and keeps the
// accumulation order of each element identical to the serial code, so results
// are bitwise independent of the thread count.
int thread_count();

void set_thread_count(int n);

}  // namespace kprune::parallel
