#include "kprune/kernels.hpp"

#include <cmath>
#include <cstring>

#include "kprune/parallel.hpp"

namespace kprune::kernels {

namespace {

double dot(const double* x, const double* y, Index n) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

// Householder reflector for x (length len), LAPACK dlarfg convention:
// H = I - tau v v^T with v[0] = 1 maps x to beta e_1. v[1:] overwrites x[1:].
double make_reflector(double* x, Index len, double& tau) {
    if (len <= 1) {
        tau = 0.0;
        return len == 1 ? x[0] : 0.0;
    }
    const double alpha = x[0];
    double xnorm = 0.0;
    for (Index i = 1; i < len; ++i) xnorm += x[i] * x[i];
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) {
        tau = 0.0;
        return alpha;
    }
    const double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
    tau = (beta - alpha) / beta;
    const double scale = 1.0 / (alpha - beta);
    for (Index i = 1; i < len; ++i) x[i] *= scale;
    x[0] = 1.0;
    return beta;
}

// Apply H = I - tau v v^T (v[0] = 1 implicit, v[1:] = vtail) to col[0:len).
void apply_reflector(const double* vtail, double tau, double* col, Index len) {
    double w = col[0];
    for (Index i = 1; i < len; ++i) w += vtail[i - 1] * col[i];
    w *= tau;
    col[0] -= w;
    for (Index i = 1; i < len; ++i) col[i] -= w * vtail[i - 1];
}

template <bool Par>
Matrix multiply_at_b_impl(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionMismatch("multiply_at_b: row counts differ");
    const Index n = a.rows(), p = a.cols(), q = b.cols();
    Matrix out(p, q);
    const Index total = p * q;
    const int nt = Par ? parallel::thread_count() : 1;
#pragma omp parallel for schedule(static) num_threads(nt) if (Par && nt > 1)
    for (Index e = 0; e < total; ++e) {
        const Index j = e / p, i = e % p;
        out(i, j) = dot(a.col(i).data(), b.col(j).data(), n);
    }
    return out;
}

template <bool Par>
Matrix multiply_ab_impl(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("multiply_ab: inner dimensions differ");
    const Index n = a.rows(), p = a.cols(), q = b.cols();
    Matrix out = Matrix::Zero(n, q);
    const int nt = Par ? parallel::thread_count() : 1;
#pragma omp parallel for schedule(static) num_threads(nt) if (Par && nt > 1)
    for (Index j = 0; j < q; ++j) {
        double* oj = out.col(j).data();
        for (Index k = 0; k < p; ++k) {
            const double bk = b(k, j);
            if (bk == 0.0) continue;
            const double* ak = a.col(k).data();
            for (Index i = 0; i < n; ++i) oj[i] += bk * ak[i];
        }
    }
    return out;
}

// In-place factorization core: w holds reflectors below the diagonal and R on
// and above it; taus[j] is the j-th reflector coefficient.
template <bool Par>
void factor_columns(Matrix& w, std::vector<double>& taus) {
    const Index rows = w.rows(), cols = w.cols();
    const int nt = Par ? parallel::thread_count() : 1;
    for (Index j = 0; j < cols; ++j) {
        double tau = 0.0;
        const double beta = make_reflector(w.col(j).data() + j, rows - j, tau);
        taus[j] = tau;
        if (tau != 0.0) {
            const double* vtail = w.col(j).data() + j + 1;
#pragma omp parallel for schedule(static) num_threads(nt) if (Par && nt > 1)
            for (Index c = j + 1; c < cols; ++c)
                apply_reflector(vtail, tau, w.col(c).data() + j, rows - j);
        }
        w(j, j) = beta;
    }
}

// Back-accumulate the thin Q factor from the reflectors stored in w.
template <bool Par>
Matrix accumulate_q(const Matrix& w, const std::vector<double>& taus, Index ncols) {
    const Index rows = w.rows();
    Matrix q = Matrix::Zero(rows, ncols);
    for (Index i = 0; i < ncols; ++i) q(i, i) = 1.0;
    const int nt = Par ? parallel::thread_count() : 1;
    for (Index j = ncols - 1; j >= 0; --j) {
        const double tau = taus[j];
        if (tau == 0.0) continue;
        const double* vtail = w.col(j).data() + j + 1;
#pragma omp parallel for schedule(static) num_threads(nt) if (Par && nt > 1)
        for (Index c = j; c < ncols; ++c)
            apply_reflector(vtail, tau, q.col(c).data() + j, rows - j);
    }
    return q;
}

template <bool Par>
void thin_qr_impl(const Matrix& m, Matrix& q, Matrix& r) {
    const Index rows = m.rows(), cols = m.cols();
    if (rows < cols)
        throw DimensionMismatch("thin_householder_qr: fewer rows than columns");
    Matrix w = m;
    std::vector<double> taus(static_cast<size_t>(cols), 0.0);
    factor_columns<Par>(w, taus);
    r = Matrix::Zero(cols, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i <= j; ++i) r(i, j) = w(i, j);
    q = accumulate_q<Par>(w, taus, cols);
}

template <bool Par>
PivotedQR pivoted_qr_impl(const Matrix& m, double rank_tol) {
    const Index rows = m.rows(), cols = m.cols();
    const Index kmax = std::min(rows, cols);
    Matrix w = m;
    std::vector<double> taus(static_cast<size_t>(kmax), 0.0);
    std::vector<Index> perm(static_cast<size_t>(cols));
    for (Index j = 0; j < cols; ++j) perm[static_cast<size_t>(j)] = j;
    Vector norms2(cols), norms2_orig(cols);
    for (Index j = 0; j < cols; ++j) {
        norms2(j) = w.col(j).squaredNorm();
        norms2_orig(j) = norms2(j);
    }
    const int nt = Par ? parallel::thread_count() : 1;

    double first_pivot = 0.0;
    Index rank = 0;
    for (Index j = 0; j < kmax; ++j) {
        Index p = j;
        for (Index c = j + 1; c < cols; ++c)
            if (norms2(c) > norms2(p)) p = c;
        // Downdated norms drift; re-measure the winner before committing.
        const double exact = w.col(p).tail(rows - j).squaredNorm();
        norms2(p) = exact;
        const double pivot_norm = std::sqrt(std::max(exact, 0.0));
        if (j == 0) first_pivot = pivot_norm;
        if (pivot_norm < rank_tol * first_pivot || pivot_norm == 0.0) break;
        if (p != j) {
            w.col(j).swap(w.col(p));
            std::swap(norms2(j), norms2(p));
            std::swap(norms2_orig(j), norms2_orig(p));
            std::swap(perm[static_cast<size_t>(j)], perm[static_cast<size_t>(p)]);
        }
        double tau = 0.0;
        const double beta = make_reflector(w.col(j).data() + j, rows - j, tau);
        taus[static_cast<size_t>(j)] = tau;
        if (tau != 0.0) {
            const double* vtail = w.col(j).data() + j + 1;
#pragma omp parallel for schedule(static) num_threads(nt) if (Par && nt > 1)
            for (Index c = j + 1; c < cols; ++c)
                apply_reflector(vtail, tau, w.col(c).data() + j, rows - j);
        }
        w(j, j) = beta;
        for (Index c = j + 1; c < cols; ++c) {
            norms2(c) -= w(j, c) * w(j, c);
            if (norms2(c) < 1e-12 * norms2_orig(c))
                norms2(c) = w.col(c).tail(rows - j - 1).squaredNorm();
        }
        rank = j + 1;
    }

    PivotedQR out;
    out.rank = rank;
    out.perm = std::move(perm);
    out.r = Matrix::Zero(rank, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < std::min(rank, j + 1); ++i) out.r(i, j) = w(i, j);
    taus.resize(static_cast<size_t>(rank));
    out.q = accumulate_q<Par>(w, taus, rank);
    return out;
}

}  // namespace

Matrix multiply_at_b(const Matrix& a, const Matrix& b) { return multiply_at_b_impl<true>(a, b); }
Matrix multiply_ab(const Matrix& a, const Matrix& b) { return multiply_ab_impl<true>(a, b); }
void thin_householder_qr(const Matrix& m, Matrix& q, Matrix& r) { thin_qr_impl<true>(m, q, r); }
PivotedQR pivoted_qr(const Matrix& m, double rank_tol) { return pivoted_qr_impl<true>(m, rank_tol); }

namespace serial {

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionMismatch("multiply_at_b: row counts differ");
    Matrix out(a.cols(), b.cols());
    for (Index i = 0; i < a.cols(); ++i)
        for (Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Index k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

Matrix multiply_ab(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("multiply_ab: inner dimensions differ");
    Matrix out = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

void thin_householder_qr(const Matrix& m, Matrix& q, Matrix& r) { thin_qr_impl<false>(m, q, r); }
PivotedQR pivoted_qr(const Matrix& m, double rank_tol) { return pivoted_qr_impl<false>(m, rank_tol); }

}  // namespace serial

}  // namespace kprune::kernels
