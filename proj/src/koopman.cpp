#include "kprune/koopman.hpp"

#include <cmath>

#include "kprune/kernels.hpp"
#include "kprune/rng.hpp"

namespace kprune {

namespace {

// Solve a^dagger rhs through the pivoted QR of a (full column rank).
Matrix pivoted_pinv_apply(const kernels::PivotedQR& pq, const Matrix& rhs) {
    const Index s = pq.rank;
    const Matrix qtr = kernels::multiply_at_b(pq.q, rhs);
    const Matrix y = pq.r.leftCols(s).triangularView<Eigen::Upper>().solve(qtr);
    Matrix out(s, rhs.cols());
    for (Index i = 0; i < s; ++i) out.row(pq.perm[static_cast<size_t>(i)]) = y.row(i);
    return out;
}

}  // namespace

LiftedData lift(const Dictionary& dict, const Matrix& basis_coeff, const Matrix& x,
                const Matrix& x_plus) {
    if (x.rows() != x_plus.rows())
        throw DimensionMismatch("lift: snapshot pair counts differ");
    if (x.cols() != dict.state_dim || x_plus.cols() != dict.state_dim)
        throw DimensionMismatch("lift: state dimension mismatch");
    if (basis_coeff.rows() != dict.size())
        throw DimensionMismatch("lift: basis coefficient rows must match dictionary size");
    const double scale = 1.0 / std::sqrt(static_cast<double>(x.rows()));
    LiftedData data;
    data.a = kernels::multiply_ab(evaluate(dict, x), basis_coeff) * scale;
    data.b = kernels::multiply_ab(evaluate(dict, x_plus), basis_coeff) * scale;
    data.basis_coeff = basis_coeff;
    return data;
}

KoopmanMatrices edmd(const LiftedData& data, double rank_tol) {
    const Index s = data.a.cols();
    const kernels::PivotedQR pa = kernels::pivoted_qr(data.a, rank_tol);
    if (pa.rank < s) throw RankDeficient("edmd: A = Psi(X) is rank deficient");
    const kernels::PivotedQR pb = kernels::pivoted_qr(data.b, rank_tol);
    if (pb.rank < s) throw RankDeficient("edmd: B = Psi(X+) is rank deficient");
    KoopmanMatrices out;
    out.k_f = pivoted_pinv_apply(pa, data.b);
    out.k_b = pivoted_pinv_apply(pb, data.a);
    out.m_c = Matrix::Identity(s, s) - out.k_f * out.k_b;
    return out;
}

PrincipalArguments principal_arguments_core(const Matrix& a, const Matrix& b,
                                            const Matrix& basis_coeff,
                                            double rank_tol) {
    const Index s = a.cols();
    if (b.cols() != s || b.rows() != a.rows())
        throw DimensionMismatch("principal_arguments: A and B shapes differ");

    const ThinQR qa = thin_qr(a);
    if (!qa.full_rank(rank_tol))
        throw RankDeficient("principal_arguments: A = Psi(X) is rank deficient");

    // Rank-revealing factorization of the image side; deficient directions
    // receive angle pi/2 and sort last.
    kernels::PivotedQR pb = kernels::pivoted_qr(b, rank_tol);
    const Index rb = pb.rank;

    if (rb == 0) {
        PrincipalArguments flat;
        flat.theta = Vector::Constant(s, 0.5 * EIGEN_PI);
        flat.u_eval = qa.q;
        flat.u_coeff = basis_coeff * qa.r.triangularView<Eigen::Upper>().solve(
                                         Matrix::Identity(s, s));
        flat.image_qr = thin_qr(Matrix::Zero(a.rows(), s));
        return flat;
    }

    // Work in the sine-squared spectral form: the eigenvalues of I - G G^T
    // are the squared principal sines and its eigenvectors are the u-side
    // singular vectors of G. Near-invariant directions cluster at zero angle,
    // where cosine-space singular values squash their gaps to O(theta^2); the
    // symmetric form keeps those splits well conditioned. Image-rank
    // deficiency lands at eigenvalue 1, i.e. angle pi/2, sorted last.
    const Matrix g = kernels::multiply_at_b(qa.q, pb.q);  // s x rb
    Matrix sin2 = Matrix::Identity(s, s) - g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sin2);
    if (es.info() != Eigen::Success)
        throw Error("principal_arguments: eigendecomposition failed");

    PrincipalArguments out;
    out.theta.resize(s);
    for (Index j = 0; j < s; ++j) {
        double lam = es.eigenvalues()(j);
        if (lam < -1e-10 || lam > 1.0 + 1e-10)
            throw NotOrthonormal("principal_arguments: squared sine outside [0, 1]");
        lam = std::min(1.0, std::max(0.0, lam));
        out.theta(j) = std::asin(std::sqrt(lam));
    }

    Matrix ufull = es.eigenvectors();  // s x s, ascending angles
    canonicalize_columns(ufull);

    out.u_eval = kernels::multiply_ab(qa.q, ufull);
    const Matrix x = qa.r.triangularView<Eigen::Upper>().solve(ufull);
    out.u_coeff = basis_coeff * x;

    if (rb == s) {
        // b = q_b * (r_piv with columns mapped back), so the image K U = b x
        // reduces to a small factor in the q_b basis.
        Matrix y(s, s);
        for (Index j = 0; j < s; ++j) y.row(j) = x.row(pb.perm[static_cast<size_t>(j)]);
        const Matrix m_img = pb.r * y;
        ThinQR small = thin_qr(m_img);
        out.image_qr.q = kernels::multiply_ab(pb.q, small.q);
        out.image_qr.r = std::move(small.r);
    } else {
        out.image_qr = thin_qr(kernels::multiply_ab(b, x));
    }
    return out;
}

PrincipalArguments principal_arguments(const LiftedData& data, double rank_tol) {
    return principal_arguments_core(data.a, data.b, data.basis_coeff, rank_tol);
}

double invariance_proximity(const PrincipalArguments& args) {
    if (args.theta.size() == 0) return 0.0;
    return std::sin(args.theta(args.theta.size() - 1));
}

double worst_case_edmd_error(const LiftedData& data, int trials, std::uint64_t seed) {
    const Index s = data.a.cols();
    const ThinQR qa = thin_qr(data.a);
    const ThinQR qb = thin_qr(data.b);
    const Matrix g = kernels::multiply_at_b(qa.q, qb.q);
    Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);

    const auto residual = [&](const Vector& w) -> double {
        const Vector bw = data.b * w;
        const double nb = bw.norm();
        if (nb < 1e-14) return -1.0;
        const Vector proj = kernels::multiply_at_b(qa.q, bw);
        return (bw - qa.q * proj).norm() / nb;
    };

    // The supremum is attained where K f is the worst principal direction of
    // the image; f = B^+ applied to it.
    const Vector v_min = svd.matrixV().col(s - 1);
    const Vector w_star = qb.r.triangularView<Eigen::Upper>().solve(v_min);
    double best = residual(w_star);

    CounterRng rng(seed, 0x77ULL);
    for (int t = 0; t < trials; ++t) {
        Vector w(s);
        for (Index i = 0; i < s; ++i) w(i) = rng.normal();
        best = std::max(best, residual(w));
    }
    return best;
}

}  // namespace kprune
