#pragma once

#include "kprune/types.hpp"

namespace kprune {

// Thin QR factorization, q: rows x k orthonormal, r: k x k upper triangular.
// Column signs follow the library convention: the first significant entry of
// every orthonormal column is nonnegative.
struct ThinQR {
    Matrix q;
    Matrix r;

    // Number of diagonal entries of r at least rank_tol * max |r_ii|.
    Index rank(double rank_tol = kDefaultRankTol) const;
    bool full_rank(double rank_tol = kDefaultRankTol) const;
};

ThinQR thin_qr(const Matrix& m);

// Compact SVD m = u * diag(sigma) * v^T with sigma nonincreasing and
// k = min(rows, cols) columns in u and v.
struct CompactSVD {
    Matrix u;
    Vector sigma;
    Matrix v;
};

CompactSVD compact_svd(const Matrix& m);

// Principal angles between the column spaces of two orthonormal matrices.
// theta is ascending in [0, pi/2]; u_coeff / v_coeff hold the paired singular
// vectors of q_u^T q_v in the same order, so that q_u * u_coeff.col(j) and
// q_v * v_coeff.col(j) are the j-th principal vector pair. Zero singular
// values map to angle pi/2 with vectors drawn from the nullspace completion.
struct PrincipalAngles {
    Vector theta;
    Matrix u_coeff;
    Matrix v_coeff;
};

PrincipalAngles principal_angles(const Matrix& q_u, const Matrix& q_v);

// Eigendecomposition state for the rank-one update chain: lambda ascending,
// e orthonormal with column j paired to lambda[j].
struct SymmetricEigUpdateState {
    Vector lambda;
    Matrix e;
};

// Eigendecomposition of E diag(lambda) E^T + b b^T via the secular equation,
// O(m^2) root-finding with deflation of negligible components and near-equal
// eigenvalues. Eigenvectors are formed from a Loewner-consistent reconstruction
// of the update vector so they stay numerically orthonormal.
SymmetricEigUpdateState rank_one_eig_update(const SymmetricEigUpdateState& state,
                                            const Vector& b);

// Given w orthonormal (rows x s), r upper triangular (s x s) and a transform
// t (s x c), returns the thin QR of (w r) t as q = w q_c, r = r_c without ever
// touching the row dimension beyond one product with q_c.
ThinQR incremental_qr(const Matrix& w, const Matrix& r, const Matrix& t,
                      double rank_tol = kDefaultRankTol);

// Frobenius norm of q^T q - I.
double orthonormality_error(const Matrix& q);

// Largest principal angle between the column spaces of two orthonormal bases.
double largest_principal_angle(const Matrix& q_u, const Matrix& q_v);

// Flip column signs so the first entry with |x| > 1e-12 * max|col| is
// nonnegative; the optional row-compensated factor keeps q * r invariant.
void canonicalize_columns(Matrix& q, Matrix* row_compensated = nullptr);

}  // namespace kprune
