#pragma once

#include <cstdint>

#include "kprune/dictionary.hpp"
#include "kprune/linalg.hpp"
#include "kprune/types.hpp"

namespace kprune {

// Lifted snapshot data under the empirical L2 inner product: a and b hold the
// basis evaluated on X and X+ scaled by 1/sqrt(N), so Euclidean inner products
// of columns equal <f,g> = (1/N) sum_i f(x_i) g(x_i).
struct LiftedData {
    Matrix a;            // N x s
    Matrix b;            // N x s
    Matrix basis_coeff;  // s0 x s, current basis in raw-dictionary coordinates
};

LiftedData lift(const Dictionary& dict, const Matrix& basis_coeff, const Matrix& x,
                const Matrix& x_plus);

struct KoopmanMatrices {
    Matrix k_f;  // forward EDMD
    Matrix k_b;  // backward EDMD
    Matrix m_c;  // consistency matrix I - k_f k_b
};

KoopmanMatrices edmd(const LiftedData& data, double rank_tol = kDefaultRankTol);

// Principal angles between the subspace and its Koopman image, together with
// the evaluated principal-vector basis and the QR factors of the evaluated
// image. Columns are ordered by ascending angle throughout; the principal
// vectors of the image side are never materialized.
struct PrincipalArguments {
    Vector theta;    // ascending, in [0, pi/2]
    Matrix u_eval;   // N x s, orthonormal evaluated principal vectors
    Matrix u_coeff;  // s0 x s, same vectors in raw-dictionary coordinates
    ThinQR image_qr; // thin QR of the evaluated image K U (w: N x s, r: s x s)
};

PrincipalArguments principal_arguments(const LiftedData& data,
                                       double rank_tol = kDefaultRankTol);

// Shared core working directly on evaluated matrices; used by the pruning
// engine for from-scratch recomputations on truncated bases.
PrincipalArguments principal_arguments_core(const Matrix& a, const Matrix& b,
                                            const Matrix& basis_coeff,
                                            double rank_tol = kDefaultRankTol);

// sin of the largest principal angle.
double invariance_proximity(const PrincipalArguments& args);

// Empirical supremum of the relative one-step EDMD residual over random
// functions in the subspace, plus the analytic maximizer.
double worst_case_edmd_error(const LiftedData& data, int trials,
                             std::uint64_t seed = 0);

}  // namespace kprune
