#pragma once

#include <optional>
#include <vector>

#include "kprune/pruning.hpp"
#include "kprune/systems.hpp"

namespace kprune {

// Lifted linear predictor z+ = a_dyn z, x_hat = c_out z, with z = values of
// the pruned basis (raw dictionary times lift_coeff) at the current state.
struct LiftedModel {
    Matrix a_dyn;       // s x s
    Matrix c_out;       // n x s
    Matrix lift_coeff;  // s0 x s
    Dictionary dict;
    double z_norm_median = 1.0;  // training lifted-norm median (divergence guard)

    Vector lift(const Vector& x) const;
};

// Fit dynamics and reconstruction matrices on the pruned orthonormal basis
// under the empirical inner product.
LiftedModel build_model(const SubspaceState& state, const SnapshotSet& data,
                        const Dictionary& dict);

// Convenience: orthonormalize the basis carried by the lifted data first.
LiftedModel build_model(const LiftedData& data, const SnapshotSet& snaps,
                        const Dictionary& dict, double rank_tol = kDefaultRankTol);

struct PredictionTrace {
    int t = 0;
    Vector x_pred;
    Vector z_pred;
    double e_state = 0.0;   // populated when a truth trajectory is provided
    double e_lifted = 0.0;
    bool divergent = false;
};

// Rolls the lifted dynamics forward without ever re-lifting from the
// reconstructed state. truth, when given, holds rows x_true(0..horizon).
// Rollouts whose lifted norm exceeds 1e6 times the training median are
// flagged divergent and truncated instead of overflowing.
std::vector<PredictionTrace> predict(const LiftedModel& model, const Vector& x0,
                                     int horizon,
                                     const std::optional<Matrix>& truth = std::nullopt);

struct TradeoffRow {
    Index dim = 0;
    double delta = 0.0;
    double recon_error = 0.0;      // sqrt of summed squared per-coordinate residuals
    Vector recon_per_coord;        // ||(I - P_S) e_j|| per state coordinate
    double state_error_at_horizon = 0.0;
};

// Replays the report's pruning run (deterministic for identical data and
// config) and fits a model on every nested subspace of the trace.
std::vector<TradeoffRow> tradeoff_scan(const LiftedData& data, const Dictionary& dict,
                                       const SnapshotSet& snaps, const PruneReport& report,
                                       int horizon, const Vector& x0,
                                       const Matrix& truth);

}  // namespace kprune
