#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kprune/dictionary.hpp"
#include "kprune/koopman.hpp"
#include "kprune/rng.hpp"
#include "kprune/synthetic.hpp"
#include "kprune/types.hpp"

namespace kprune::testing {

// Max abs difference after aligning column signs (orthonormal factors are
// unique only up to per-column sign).
inline double sign_aligned_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
    double worst = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
        const double s = a.col(j).dot(b.col(j)) < 0.0 ? -1.0 : 1.0;
        worst = std::max(worst, (a.col(j) - s * b.col(j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_fro_error(const Matrix& approx, const Matrix& exact) {
    return (approx - exact).norm() / std::max(exact.norm(), 1e-300);
}

inline bool is_upper_triangular(const Matrix& r) {
    for (Index j = 0; j < r.cols(); ++j)
        for (Index i = j + 1; i < r.rows(); ++i)
            if (r(i, j) != 0.0) return false;
    return true;
}

// Index of a monomial (or the constant) in a dictionary; -1 when absent.
inline Index find_monomial(const Dictionary& dict, int e1, int e2) {
    for (Index j = 0; j < dict.size(); ++j) {
        const Observable& o = dict.observables[static_cast<size_t>(j)];
        if (e1 == 0 && e2 == 0 && o.kind == Observable::Kind::constant) return j;
        if (o.kind == Observable::Kind::monomial && o.exponents.size() == 2 &&
            o.exponents[0] == e1 && o.exponents[1] == e2)
            return j;
    }
    return -1;
}

// Coefficients of the known benchmark2d eigenfunctions {1, x1, x1^2,
// 1 - 10 x1 - x2^2} in a monomial-bearing dictionary (eigenvalues 1, 0.8,
// 0.64, 0.9).
inline Matrix eq21_eigenfunction_coeffs(const Dictionary& dict) {
    const Index i00 = find_monomial(dict, 0, 0);
    const Index i10 = find_monomial(dict, 1, 0);
    const Index i20 = find_monomial(dict, 2, 0);
    const Index i02 = find_monomial(dict, 0, 2);
    if (i00 < 0 || i10 < 0 || i20 < 0 || i02 < 0)
        throw Error("dictionary lacks the monomials needed for the planted eigenfunctions");
    Matrix f = Matrix::Zero(dict.size(), 4);
    f(i00, 0) = 1.0;
    f(i10, 1) = 1.0;
    f(i20, 2) = 1.0;
    f(i00, 3) = 1.0;
    f(i10, 3) = -10.0;
    f(i02, 3) = -1.0;
    return f;
}

inline Vector eq21_eigenvalues() {
    Vector lam(4);
    lam << 1.0, 0.8, 0.64, 0.9;
    return lam;
}

// Synthetic instance carrying a planted eps-approximate eigenfunction: a unit
// mixture of the flattest principal direction and the first direction of the
// violating block, with the mixing weight solved so the measured angle between
// f and K f hits the requested target.
struct PlantedApproxEigenfunction {
    SyntheticInstance inst;
    Vector f_eval;        // unit norm
    Vector kf_eval;       // evaluation of K f
    Vector coeff;         // coordinates of f in the principal basis
    double eps_measured;  // sin theta(f, K f) from the data
    double eta;           // energy in the dropped block (exact distance after one drop)
    Index keep;           // size of the retained block
};

inline PlantedApproxEigenfunction plant_approx_eigenfunction(std::uint64_t seed, Index s,
                                                             Index keep, double eps_target,
                                                             double dropped_lo = 0.45,
                                                             double dropped_hi = 1.25) {
    Vector theta(s);
    theta(0) = 0.0;
    for (Index i = 1; i < keep; ++i) theta(i) = 1e-6 * static_cast<double>(i);
    for (Index i = keep; i < s; ++i)
        theta(i) = dropped_lo + (dropped_hi - dropped_lo) * static_cast<double>(i - keep) /
                                    std::max<double>(1.0, static_cast<double>(s - keep - 1));

    PlantedApproxEigenfunction out;
    out.keep = keep;
    out.inst = synthetic_instance(seed, std::max<Index>(8 * s, 64), theta);

    // Mix into the first dropped direction; gamma equals its sine, which makes
    // the information-loss bound nearly tight.
    const double ck = std::cos(theta(keep));
    const double t2 = eps_target * eps_target;
    const double eta2 = (1.0 - std::sqrt(1.0 - t2)) / (1.0 - ck);
    out.eta = std::sqrt(eta2);

    out.coeff = Vector::Zero(s);
    out.coeff(0) = std::sqrt(1.0 - eta2);
    out.coeff(keep) = out.eta;
    out.f_eval = out.inst.q_a * out.coeff;
    out.kf_eval = out.inst.q_b * out.coeff;
    const double cosang =
        out.f_eval.dot(out.kf_eval) / (out.f_eval.norm() * out.kf_eval.norm());
    out.eps_measured = std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
    return out;
}

// Reference pruning loop that removes the top consistency-matrix eigenvector
// each generation; the equivalence oracle for SPV.
struct RfbGeneration {
    Matrix a;  // evaluated basis of the current subspace
    Matrix b;
};

inline std::vector<RfbGeneration> rfb_edmd_run(const LiftedData& data, double eps,
                                               int max_generations) {
    std::vector<RfbGeneration> gens;
    Matrix a = data.a, b = data.b;
    for (int g = 0; g <= max_generations; ++g) {
        gens.push_back({a, b});
        LiftedData cur{a, b, Matrix::Identity(a.cols(), a.cols())};
        const KoopmanMatrices km = edmd(cur);
        Eigen::EigenSolver<Matrix> es(km.m_c);
        Index imax = 0;
        for (Index i = 1; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i).real() > es.eigenvalues()(imax).real()) imax = i;
        const double lmax = es.eigenvalues()(imax).real();
        if (std::sqrt(std::max(0.0, lmax)) <= eps) break;
        if (a.cols() == 1) break;

        const Vector v = es.eigenvectors().col(imax).real();
        // Complement of span{Psi v} inside the subspace w.r.t. the empirical
        // inner product: coefficient vectors c with c^T (a^T a) v = 0.
        const Vector w = a.transpose() * (a * v);
        Eigen::HouseholderQR<Matrix> qr(w);
        const Matrix full = qr.householderQ();
        const Matrix complement = full.rightCols(a.cols() - 1);
        a = a * complement;
        b = b * complement;
    }
    return gens;
}

}  // namespace kprune::testing
