#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kprune/types.hpp"

namespace kprune {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Oracle-equivalence and bound checks on seeded random instances:
// consistency-matrix spectrum vs principal sines, fast-path vs from-scratch
// recomputation, projection-norm bounds, the single-generation information
// loss bound, incremental-QR span agreement and the rank-one update against
// a dense eigensolver.
std::vector<CheckResult> run_verification(std::uint64_t seed, Index s);

}  // namespace kprune
