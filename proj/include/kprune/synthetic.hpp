#pragma once

#include <cstdint>

#include "kprune/koopman.hpp"

namespace kprune {

// Deterministic Gaussian matrix / orthonormal basis for verification runs.
Matrix random_matrix(std::uint64_t seed, Index rows, Index cols);
Matrix random_orthonormal(std::uint64_t seed, Index rows, Index cols);

// Random ascending angles in [min_angle, max_angle].
Vector random_angles(std::uint64_t seed, Index s, double min_angle, double max_angle);

// Lifted-data instance with prescribed principal angles between range(a) and
// range(b): b's orthonormal basis is q_a cos(theta) + q_perp sin(theta)
// column-wise. With shared_r, both sides use the same triangular factor, so
// the j-th principal vector u_j of the pair is itself a sin(theta_j)-
// approximate eigenfunction with K u_j landing on the j-th image direction.
struct SyntheticInstance {
    LiftedData data;  // basis_coeff = identity
    Vector theta;     // prescribed, ascending
    Matrix q_a;       // orthonormal basis of range(a)
    Matrix q_b;       // orthonormal basis of range(b)
    Matrix r;         // triangular factor used for a (and b when shared)
};

SyntheticInstance synthetic_instance(std::uint64_t seed, Index n_rows, const Vector& theta,
                                     bool shared_r = true);

// Generic random full-rank instance (no prescribed structure).
LiftedData random_lifted_data(std::uint64_t seed, Index n_rows, Index s);

}  // namespace kprune
