#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kprune/koopman.hpp"

namespace kprune {

enum class PruneMode { spv, mpv, hybrid };

const char* prune_mode_name(PruneMode mode);

struct PruneConfig {
    double eps = 1e-3;           // target invariance proximity, in [0, 1)
    double eps_coarse = 0.1;     // hybrid pre-pruning tolerance, in (eps, 1]
    bool use_fast_path = true;   // rank-one updates + incremental QR vs fresh SVD
    int oracle_check_period = 0; // every p-th generation re-anchor to a fresh SVD
                                 // and assert agreement; 0 disables
    double rank_tol = kDefaultRankTol;
};

struct SubspaceState {
    PrincipalArguments args;
    Index dim = 0;
    int generation = 0;
};

SubspaceState initial_state(const LiftedData& data, double rank_tol = kDefaultRankTol);

struct TraceEntry {
    int generation = 0;
    Index dim = 0;
    double delta = 0.0;     // proximity after this generation's recomputation
    double gamma = 0.0;     // min principal sine among directions dropped to
                            // reach this state; NaN for the initial entry
    Index dropped_count = 0;
    double wall_seconds = 0.0;
};

// Failure (the empty subspace) is a value: final is empty and the trace still
// carries every generation, so callers can pick the last acceptable one.
struct PruneReport {
    std::vector<TraceEntry> trace;
    std::optional<SubspaceState> final;
    PruneMode mode = PruneMode::spv;
    PruneConfig config;

    bool failed() const { return !final.has_value(); }
};

PruneReport spv_prune(const SubspaceState& state, const PruneConfig& config);
PruneReport mpv_prune(const SubspaceState& state, const PruneConfig& config);
PruneReport hybrid_prune(const SubspaceState& state, const PruneConfig& config);

// Observer variant used to walk the nested subspaces (materializes a full
// SubspaceState per generation, which the plain entry points avoid).
using GenerationObserver = std::function<void(const SubspaceState&)>;
PruneReport prune_with_observer(const SubspaceState& state, PruneMode mode,
                                const PruneConfig& config,
                                const GenerationObserver& observer);

// Recomputes the principal arguments after dropping the top k principal
// vectors: k chained rank-one eigen-updates of the truncated sine spectrum
// plus an incremental QR update of the image factors. Never recomputes an
// SVD over the data dimension.
PrincipalArguments fast_recompute(const PrincipalArguments& args, Index k,
                                  double rank_tol = kDefaultRankTol);

// Empirical-L2 distance from the normalized function to the subspace.
// f_eval holds the function evaluated at the snapshot states (any scaling).
double eigenfunction_distance(const Vector& f_eval, const SubspaceState& state);
double eigenfunction_distance(const Vector& f_coeff, const Dictionary& dict,
                              const Matrix& x, const SubspaceState& state);

}  // namespace kprune
