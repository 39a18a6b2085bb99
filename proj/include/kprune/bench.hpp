#pragma once

#include <string>
#include <vector>

#include "kprune/pruning.hpp"
#include "kprune/systems.hpp"

namespace kprune {

struct BenchRow {
    Index dim = 0;
    std::string mode;
    double wall_seconds = 0.0;
    double first_comp_seconds = 0.0;  // one principal-argument computation
};

struct BenchOptions {
    Index n_traj = 1000;
    Index traj_len = 5;
    std::uint64_t seed = 1;
    double eps = 1e-3;
    double eps_coarse = 0.1;
    int repeats = 3;  // median of this many runs
};

// Known modes: spv, spv_fast, mpv, mpv_fast, hybrid_fast. For every dim the
// dictionary is the constant plus a Wendland kernel grid whose leading
// preconditioner pivots are truncated to exactly the requested size, pruned
// on Van der Pol snapshots. Naive/fast pairs must land on the same final
// subspace (largest principal angle < 1e-7) before any timing is reported.
std::vector<BenchRow> timing_harness(const std::vector<Index>& dims,
                                     const std::vector<std::string>& modes,
                                     const BenchOptions& options);

// Dictionary used by the harness.
Dictionary bench_dictionary(Index target_dim);

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace kprune
