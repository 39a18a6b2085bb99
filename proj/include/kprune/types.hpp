#pragma once

#include <stdexcept>
#include <string>

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

namespace kprune {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default relative tolerance for all rank decisions: a diagonal entry of a
// triangular factor counts as zero when below rank_tol * max |r_ii|.
inline constexpr double kDefaultRankTol = 1e-10;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotOrthonormal : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct RankDeficientUpdate : Error {
    using Error::Error;
};

struct DegenerateData : Error {
    using Error::Error;
};

struct ZeroFunction : Error {
    using Error::Error;
};

struct NegativeRadicand : Error {
    using Error::Error;
};

struct InvalidConfig : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace kprune
