#pragma once

#include <cstdint>

#include <json.hpp>

#include "kprune/pruning.hpp"
#include "kprune/types.hpp"

namespace kprune {

struct SnapshotSet {
    Matrix x;       // N x n
    Matrix x_plus;  // N x n

    Index size() const { return x.rows(); }
    Index state_dim() const { return x.cols(); }
};

struct Box {
    Vector lo;
    Vector hi;
};

struct SystemSpec {
    enum class Kind { benchmark2d, van_der_pol };

    Kind kind = Kind::benchmark2d;
    double dt = 0.025;  // van_der_pol only
    Box domain;         // sampling box for initial conditions
    std::uint64_t seed = 0;
};

// x1+ = 0.8 x1, x2+ = sqrt(0.9 x2^2 + x1 + 0.1); throws NegativeRadicand when
// the argument of the square root is negative.
Vector step_benchmark2d(const Vector& x);

// Euler-discretized Van der Pol map with time step dt.
Vector step_van_der_pol(const Vector& x, double dt);

Vector step_system(const SystemSpec& spec, const Vector& x);

// Deterministic snapshot generation: n_traj trajectories of traj_len steps
// from initial conditions sampled uniformly in the domain, consecutive states
// paired. Trajectory t draws from counter stream t of the seed, so the result
// is identical for any thread count and any generation order.
SnapshotSet generate_data(const SystemSpec& spec, Index n_traj, Index traj_len);

// Trajectory x0, T(x0), ..., T^steps(x0) as rows.
Matrix simulate(const SystemSpec& spec, const Vector& x0, Index steps);

struct ExperimentConfig {
    SystemSpec system;
    Index n_traj = 100;
    Index traj_len = 50;
    nlohmann::json dictionary;  // dictionary JSON document
    PruneConfig prune;
    Vector x0;
    int horizon = 100;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);

}  // namespace kprune
