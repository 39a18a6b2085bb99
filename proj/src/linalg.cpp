#include "kprune/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "kprune/kernels.hpp"

namespace kprune {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Singular values in [1, 1 + 1e-12] clamp to 1 for arccos domain safety;
// anything above that indicates a non-orthonormal input.
constexpr double kCosineSlack = 1e-12;

double first_significant_sign(const double* col, Index n) {
    double amax = 0.0;
    for (Index i = 0; i < n; ++i) amax = std::max(amax, std::abs(col[i]));
    if (amax == 0.0) return 1.0;
    const double cut = 1e-12 * amax;
    for (Index i = 0; i < n; ++i)
        if (std::abs(col[i]) > cut) return col[i] < 0.0 ? -1.0 : 1.0;
    return 1.0;
}

}  // namespace

void canonicalize_columns(Matrix& q, Matrix* row_compensated) {
    for (Index j = 0; j < q.cols(); ++j) {
        if (first_significant_sign(q.col(j).data(), q.rows()) < 0.0) {
            q.col(j) = -q.col(j);
            if (row_compensated != nullptr) row_compensated->row(j) = -row_compensated->row(j);
        }
    }
}

Index ThinQR::rank(double rank_tol) const {
    const Index k = r.rows();
    double dmax = 0.0;
    for (Index i = 0; i < k; ++i) dmax = std::max(dmax, std::abs(r(i, i)));
    if (dmax == 0.0) return 0;
    Index n = 0;
    for (Index i = 0; i < k; ++i)
        if (std::abs(r(i, i)) >= rank_tol * dmax) ++n;
    return n;
}

bool ThinQR::full_rank(double rank_tol) const { return rank(rank_tol) == r.rows(); }

ThinQR thin_qr(const Matrix& m) {
    if (m.rows() < m.cols())
        throw DimensionMismatch("thin_qr: matrix has fewer rows than columns");
    ThinQR out;
    kernels::thin_householder_qr(m, out.q, out.r);
    canonicalize_columns(out.q, &out.r);
    return out;
}

CompactSVD compact_svd(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CompactSVD out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    for (Index j = 0; j < out.u.cols(); ++j) {
        if (first_significant_sign(out.u.col(j).data(), out.u.rows()) < 0.0) {
            out.u.col(j) = -out.u.col(j);
            out.v.col(j) = -out.v.col(j);
        }
    }
    return out;
}

double orthonormality_error(const Matrix& q) {
    Matrix g = kernels::multiply_at_b(q, q);
    g.diagonal().array() -= 1.0;
    return g.norm();
}

PrincipalAngles principal_angles(const Matrix& q_u, const Matrix& q_v) {
    if (q_u.rows() != q_v.rows())
        throw DimensionMismatch("principal_angles: ambient dimensions differ");
    if (orthonormality_error(q_u) > 1e-8)
        throw NotOrthonormal("principal_angles: first basis is not orthonormal");
    if (orthonormality_error(q_v) > 1e-8)
        throw NotOrthonormal("principal_angles: second basis is not orthonormal");

    const Index k = std::min(q_u.cols(), q_v.cols());
    const Matrix g = kernels::multiply_at_b(q_u, q_v);
    Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);

    PrincipalAngles out;
    out.theta.resize(k);
    for (Index j = 0; j < k; ++j) {
        double s = j < svd.singularValues().size() ? svd.singularValues()(j) : 0.0;
        if (s > 1.0) {
            if (s > 1.0 + kCosineSlack)
                throw NotOrthonormal("principal_angles: singular value exceeds 1");
            s = 1.0;
        }
        out.theta(j) = std::acos(s);
    }
    out.u_coeff = svd.matrixU().leftCols(k);
    out.v_coeff = svd.matrixV().leftCols(k);
    for (Index j = 0; j < k; ++j) {
        if (first_significant_sign(out.u_coeff.col(j).data(), out.u_coeff.rows()) < 0.0) {
            out.u_coeff.col(j) = -out.u_coeff.col(j);
            out.v_coeff.col(j) = -out.v_coeff.col(j);
        }
    }
    return out;
}

double largest_principal_angle(const Matrix& q_u, const Matrix& q_v) {
    // The cosine route loses half the digits near zero angle, so small angles
    // are recomputed from the projection residual (Bjorck-Golub sine formula,
    // valid when the second argument has the smaller dimension).
    const Matrix& big = q_u.cols() >= q_v.cols() ? q_u : q_v;
    const Matrix& small = q_u.cols() >= q_v.cols() ? q_v : q_u;
    if (small.cols() == 0) return 0.0;
    const Matrix g = kernels::multiply_at_b(big, small);
    Eigen::BDCSVD<Matrix> svd(g);
    double cmin = svd.singularValues()(svd.singularValues().size() - 1);
    if (cmin > 1.0) {
        if (cmin > 1.0 + kCosineSlack)
            throw NotOrthonormal("largest_principal_angle: singular value exceeds 1");
        cmin = 1.0;
    }
    if (cmin < 0.70710678118654752) return std::acos(cmin);
    const Matrix resid = small - kernels::multiply_ab(big, g);
    Eigen::BDCSVD<Matrix> rsvd(resid);
    const double smax = std::min(1.0, rsvd.singularValues()(0));
    return std::asin(smax);
}

// ---------------------------------------------------------------------------
// Rank-one symmetric eigenvalue update.
//
// Rotating into the current eigenbasis reduces the problem to
// D + z z^T with D = diag(d) and z = E^T b. Components with |z_i| below the
// deflation tolerance and pairs of nearly equal d_i are deflated out; the
// remaining eigenvalues are the roots of the secular function
//   f(mu) = 1 + sum_i z_i^2 / (d_i - mu),
// one per interval between consecutive poles. Each root is located by a
// guarded hybrid of bisection and one-pole rational interpolation, working in
// the offset tau = mu - d_K from the nearest pole so the differences d_i - mu
// never suffer cancellation. The update vector is then reconstructed from the
// computed roots (Loewner product formula) so that the eigenvectors
// v_j ~ (zhat_i / (d_i - mu_j))_i come out numerically orthonormal.
// ---------------------------------------------------------------------------

namespace {

struct SecularRoot {
    Index origin;  // index K of the pole the offset is measured from
    double tau;    // mu = d[K] + tau
    Vector delta;  // delta[i] = d[i] - mu, computed as (d[i] - d[K]) - tau
};

double secular_f(const Vector& d, const Vector& z, Index origin, double tau,
                 Vector& delta, double& fprime, double& fabs_sum) {
    const Index m = d.size();
    double f = 1.0;
    fprime = 0.0;
    fabs_sum = 1.0;
    for (Index i = 0; i < m; ++i) {
        delta(i) = (d(i) - d(origin)) - tau;
        const double t = z(i) * z(i) / delta(i);
        f += t;
        fabs_sum += std::abs(t);
        fprime += t / delta(i);
    }
    return f;
}

SecularRoot solve_secular_interval(const Vector& d, const Vector& z, Index j,
                                   double rho_sum) {
    const Index m = d.size();
    SecularRoot root;
    root.delta.resize(m);
    double lo, hi;
    if (j < m - 1) {
        // Root in (d_j, d_{j+1}); pick the nearer pole as origin from the
        // sign of f at the midpoint.
        const double half = 0.5 * (d(j + 1) - d(j));
        Vector tmp(m);
        double fp, fs;
        const double fmid = secular_f(d, z, j, half, tmp, fp, fs);
        if (fmid >= 0.0) {
            root.origin = j;
            lo = 0.0;
            hi = half;
        } else {
            root.origin = j + 1;
            lo = -half;
            hi = 0.0;
        }
    } else {
        // Last root in (d_{m-1}, d_{m-1} + sum z_i^2].
        root.origin = m - 1;
        lo = 0.0;
        hi = rho_sum;
    }

    double tau = 0.5 * (lo + hi);
    double f = 0.0, fprime = 0.0, fabs_sum = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        f = secular_f(d, z, root.origin, tau, root.delta, fprime, fabs_sum);
        if (f == 0.0 || std::abs(f) <= 8.0 * kEps * fabs_sum) break;
        if (f > 0.0)
            hi = tau;
        else
            lo = tau;
        const double width = hi - lo;
        if (width <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
        // One-pole rational model fitted to f and f' at the current iterate.
        double cand = fprime * tau * tau / (f + fprime * tau);
        if (!std::isfinite(cand) || cand <= lo || cand >= hi) cand = 0.5 * (lo + hi);
        if (cand == tau) break;
        tau = cand;
    }
    secular_f(d, z, root.origin, tau, root.delta, fprime, fabs_sum);
    root.tau = tau;
    return root;
}

}  // namespace

SymmetricEigUpdateState rank_one_eig_update(const SymmetricEigUpdateState& state,
                                            const Vector& b) {
    const Index m = state.lambda.size();
    if (state.e.rows() != m || state.e.cols() != m || b.size() != m)
        throw DimensionMismatch("rank_one_eig_update: inconsistent dimensions");
    if (m == 0) return state;

    Vector d = state.lambda;
    Vector z = state.e.transpose() * b;
    Matrix ework = state.e;

    const double znorm2 = z.squaredNorm();
    const double scale = std::max(std::abs(d(0)), std::abs(d(m - 1))) + znorm2;
    const double tol = 64.0 * kEps * std::max(scale, kEps);

    std::vector<bool> deflated(static_cast<size_t>(m), false);
    for (Index i = 0; i < m; ++i)
        if (std::abs(z(i)) <= tol) {
            deflated[static_cast<size_t>(i)] = true;
            z(i) = 0.0;
        }

    // Near-equal eigenvalues: rotate the pair so one z component vanishes.
    Index prev = -1;
    for (Index i = 0; i < m; ++i) {
        if (deflated[static_cast<size_t>(i)]) continue;
        if (prev >= 0 && d(i) - d(prev) <= tol) {
            const double r = std::hypot(z(prev), z(i));
            const double c = z(prev) / r, s = z(i) / r;
            z(prev) = r;
            z(i) = 0.0;
            const double dp = d(prev), di = d(i);
            d(prev) = c * c * dp + s * s * di;
            d(i) = s * s * dp + c * c * di;
            Vector ep = ework.col(prev);
            ework.col(prev) = c * ep + s * ework.col(i);
            ework.col(i) = -s * ep + c * ework.col(i).eval();
            deflated[static_cast<size_t>(i)] = true;
        } else {
            prev = i;
        }
    }

    std::vector<Index> surv;
    for (Index i = 0; i < m; ++i)
        if (!deflated[static_cast<size_t>(i)]) surv.push_back(i);
    const Index ms = static_cast<Index>(surv.size());

    Vector out_lambda(m);
    Matrix out_e(m, m);
    std::vector<std::pair<double, Index>> order;  // (eigenvalue, column in scratch)
    Matrix scratch(m, m);
    Index scol = 0;

    for (Index i = 0; i < m; ++i) {
        if (!deflated[static_cast<size_t>(i)]) continue;
        scratch.col(scol) = ework.col(i);
        order.emplace_back(d(i), scol);
        ++scol;
    }

    if (ms > 0) {
        Vector dv(ms), zv(ms);
        for (Index i = 0; i < ms; ++i) {
            dv(i) = d(surv[static_cast<size_t>(i)]);
            zv(i) = z(surv[static_cast<size_t>(i)]);
        }
        const double rho_sum = zv.squaredNorm() + tol;

        std::vector<SecularRoot> roots;
        roots.reserve(static_cast<size_t>(ms));
        for (Index j = 0; j < ms; ++j)
            roots.push_back(solve_secular_interval(dv, zv, j, rho_sum));

        // Loewner-consistent reconstruction of the update vector.
        Vector zhat(ms);
        for (Index i = 0; i < ms; ++i) {
            double prod = -roots[static_cast<size_t>(ms - 1)].delta(i);  // mu_last - d_i
            for (Index j = 0; j < i; ++j)
                prod *= (-roots[static_cast<size_t>(j)].delta(i)) / (dv(j) - dv(i));
            for (Index j = i; j < ms - 1; ++j)
                prod *= (-roots[static_cast<size_t>(j)].delta(i)) / (dv(j + 1) - dv(i));
            if (prod > 0.0)
                zhat(i) = std::copysign(std::sqrt(prod), zv(i));
            else
                zhat(i) = zv(i);
        }

        Matrix vsmall(ms, ms);
        for (Index j = 0; j < ms; ++j) {
            Vector col(ms);
            for (Index i = 0; i < ms; ++i) col(i) = zhat(i) / roots[static_cast<size_t>(j)].delta(i);
            vsmall.col(j) = col / col.norm();
        }

        Matrix esub(m, ms);
        for (Index i = 0; i < ms; ++i) esub.col(i) = ework.col(surv[static_cast<size_t>(i)]);
        Matrix solved = esub * vsmall;
        for (Index j = 0; j < ms; ++j) {
            scratch.col(scol) = solved.col(j);
            order.emplace_back(dv(roots[static_cast<size_t>(j)].origin) + roots[static_cast<size_t>(j)].tau, scol);
            ++scol;
        }
    }

    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (Index j = 0; j < m; ++j) {
        out_lambda(j) = order[static_cast<size_t>(j)].first;
        out_e.col(j) = scratch.col(order[static_cast<size_t>(j)].second);
    }
    canonicalize_columns(out_e);
    return {out_lambda, out_e};
}

ThinQR incremental_qr(const Matrix& w, const Matrix& r, const Matrix& t,
                      double rank_tol) {
    if (w.cols() != r.rows() || r.cols() != t.rows())
        throw DimensionMismatch("incremental_qr: inconsistent dimensions");
    const Matrix c = r * t;
    ThinQR small = thin_qr(c);
    if (!small.full_rank(rank_tol))
        throw RankDeficientUpdate("incremental_qr: transformed factor is rank deficient");
    ThinQR out;
    out.q = kernels::multiply_ab(w, small.q);
    out.r = std::move(small.r);
    return out;
}

}  // namespace kprune
