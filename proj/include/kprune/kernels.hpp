#pragma once

#include <vector>

#include "kprune/types.hpp"

namespace kprune::kernels {

// Dense kernels for the tall (N x s, N >> s) matrices this library lives on.
// The OpenMP versions partition whole output elements between threads; each
// element is accumulated in the same order as in a single-threaded run, so
// results are bitwise independent of the thread count. The serial namespace
// holds naive reference implementations used by the tests and benchmarks.

// out = a^T * b, a: N x p, b: N x q.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);

// out = a * b, a: N x p, b: p x q.
Matrix multiply_ab(const Matrix& a, const Matrix& b);

// Thin Householder QR of m (rows >= cols): q has orthonormal columns
// (rows x cols), r is upper triangular (cols x cols). No pivoting.
void thin_householder_qr(const Matrix& m, Matrix& q, Matrix& r);

struct PivotedQR {
    Matrix q;                 // rows x rank
    Matrix r;                 // rank x cols, r(i,j) refers to pivot order
    std::vector<Index> perm;  // perm[i] = original column index of pivot i
    Index rank = 0;           // pivots with |r_ii| >= rank_tol * |r_00|
};

// Businger-Golub column-pivoted QR with norm downdating. Stops at the first
// pivot whose column norm falls below rank_tol times the first pivot norm.
PivotedQR pivoted_qr(const Matrix& m, double rank_tol);

namespace serial {

Matrix multiply_at_b(const Matrix& a, const Matrix& b);
Matrix multiply_ab(const Matrix& a, const Matrix& b);
void thin_householder_qr(const Matrix& m, Matrix& q, Matrix& r);
PivotedQR pivoted_qr(const Matrix& m, double rank_tol);

}  // namespace serial

}  // namespace kprune::kernels
