#include "kprune/verify.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "kprune/io.hpp"
#include "kprune/pruning.hpp"
#include "kprune/rng.hpp"
#include "kprune/synthetic.hpp"

namespace kprune {

namespace {

CheckResult check(const std::string& name, bool passed, double measured, double bound) {
    return {name, passed,
            "measured " + format_double(measured) + " vs bound " + format_double(bound)};
}

CheckResult consistency_spectrum(std::uint64_t seed, Index s) {
    const LiftedData data = random_lifted_data(seed, std::max<Index>(10 * s, 40), s);
    const KoopmanMatrices km = edmd(data);
    const PrincipalArguments args = principal_arguments(data);

    Eigen::EigenSolver<Matrix> es(km.m_c);
    std::vector<double> lam(static_cast<size_t>(s));
    for (Index i = 0; i < s; ++i) lam[static_cast<size_t>(i)] = es.eigenvalues()(i).real();
    std::sort(lam.begin(), lam.end());

    double err = 0.0;
    for (Index i = 0; i < s; ++i) {
        const double sine = std::sin(args.theta(i));
        err = std::max(err, std::abs(lam[static_cast<size_t>(i)] - sine * sine));
    }
    return check("consistency-spectrum", err <= 1e-8, err, 1e-8);
}

CheckResult fast_path_equivalence(std::uint64_t seed, Index s) {
    const Vector theta = random_angles(seed, s, 0.0, 1.5);
    const SyntheticInstance inst = synthetic_instance(seed, std::max<Index>(8 * s, 64), theta);
    const PrincipalArguments args = principal_arguments(inst.data);
    const Index k = std::max<Index>(1, s / 3);

    const PrincipalArguments fast = fast_recompute(args, k);
    const Index keep = s - k;
    const Matrix image =
        args.image_qr.q * args.image_qr.r.leftCols(keep);
    const PrincipalArguments fresh = principal_arguments_core(
        args.u_eval.leftCols(keep), image, args.u_coeff.leftCols(keep));

    const double dtheta = (fast.theta - fresh.theta).cwiseAbs().maxCoeff();
    const double angle = largest_principal_angle(fast.u_eval, fresh.u_eval);
    const bool ok = dtheta <= 1e-8 && angle < 1e-7;
    return check("fast-path-equivalence", ok, std::max(dtheta, angle), 1e-7);
}

CheckResult projection_bounds(std::uint64_t seed, Index s) {
    const Index n = std::max<Index>(6 * s, 48);
    const Index d1 = std::max<Index>(2, s / 2), d2 = s;
    const Matrix qu = random_orthonormal(seed + 11, n, d1);
    const Matrix qv = random_orthonormal(seed + 12, n, d2);
    const PrincipalAngles pa = principal_angles(qu, qv);
    const double cmax = std::cos(pa.theta(pa.theta.size() - 1));
    const double cmin = std::cos(pa.theta(0));

    CounterRng rng(seed, 0x70726F6AULL);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        Vector c(d1);
        for (Index i = 0; i < d1; ++i) c(i) = rng.normal();
        c /= c.norm();
        const Vector u = qu * c;
        const double p2 = (qv.transpose() * u).squaredNorm();
        if (p2 < cmax * cmax - 1e-10 || p2 > cmin * cmin + 1e-10) {
            ok = false;
            worst = p2;
        }
    }
    return check("projection-bounds", ok, worst, cmin * cmin);
}

CheckResult information_loss_bound(std::uint64_t seed, Index s) {
    // Angle profile: a tightly invariant block, then a violating block.
    Vector theta(s);
    const Index keep = std::max<Index>(2, s / 2);
    theta(0) = 0.0;
    for (Index i = 1; i < keep; ++i) theta(i) = 1e-4 * static_cast<double>(i);
    for (Index i = keep; i < s; ++i)
        theta(i) = 0.45 + 0.8 * static_cast<double>(i - keep) / static_cast<double>(s - keep);
    const SyntheticInstance inst = synthetic_instance(seed, std::max<Index>(8 * s, 64), theta);

    // Unit mixture of a retained and a dropped principal direction.
    const double eta = 0.01;
    Vector c = Vector::Zero(s);
    c(0) = std::sqrt(1.0 - eta * eta);
    c(s - 1) = eta;
    const Vector f_eval = inst.q_a * c;
    const Vector kf_eval = inst.q_b * c;
    const double cos_fkf = f_eval.dot(kf_eval) / (f_eval.norm() * kf_eval.norm());
    const double eps_measured = std::sqrt(std::max(0.0, 1.0 - cos_fkf * cos_fkf));

    PruneConfig cfg;
    cfg.eps = 0.1;
    SubspaceState state0 = initial_state(inst.data);
    std::vector<SubspaceState> gens;
    prune_with_observer(state0, PruneMode::mpv, cfg,
                        [&](const SubspaceState& st) { gens.push_back(st); });
    if (gens.size() < 2) return {"information-loss-bound", false, "pruning dropped nothing"};
    const double dist = eigenfunction_distance(f_eval, gens[1]);

    // gamma of the first drop generation.
    const PruneReport rep = mpv_prune(state0, cfg);
    const double gamma = rep.trace.at(1).gamma;
    const double bound = (1.0 + 1e-6) * eps_measured / gamma;
    return check("information-loss-bound", dist <= bound, dist, bound);
}

CheckResult incremental_qr_span(std::uint64_t seed, Index s) {
    const Index n = std::max<Index>(8 * s, 64);
    const Index c = std::max<Index>(1, s - s / 3);
    const Matrix w = random_orthonormal(seed + 21, n, s);
    Matrix r = random_matrix(seed + 22, s, s).triangularView<Eigen::Upper>();
    r.diagonal().array() += 3.0;
    const Matrix t = random_matrix(seed + 23, s, c);

    const ThinQR inc = incremental_qr(w, r, t);
    const ThinQR scratch = thin_qr(w * r * t);
    const double angle = largest_principal_angle(inc.q, scratch.q);
    const double rdiff = (inc.r.cwiseAbs() - scratch.r.cwiseAbs()).cwiseAbs().maxCoeff() /
                         scratch.r.cwiseAbs().maxCoeff();
    const bool ok = angle < 1e-8 && rdiff < 1e-8;
    return check("incremental-qr-span", ok, std::max(angle, rdiff), 1e-8);
}

CheckResult rank_one_update_oracle(std::uint64_t seed, Index s) {
    const Index m = std::min<Index>(s, 12);
    CounterRng rng(seed, 0x757064ULL);
    Vector lambda(m);
    for (Index i = 0; i < m; ++i) lambda(i) = rng.uniform(-1.0, 1.0);
    std::sort(lambda.data(), lambda.data() + m);
    SymmetricEigUpdateState st{lambda, Matrix::Identity(m, m)};
    Matrix acc = Matrix(lambda.asDiagonal());
    double err = 0.0;
    for (int l = 0; l < 5; ++l) {
        Vector b(m);
        for (Index i = 0; i < m; ++i) b(i) = rng.normal();
        st = rank_one_eig_update(st, b);
        acc += b * b.transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es(acc);
        err = std::max(err, (st.lambda - es.eigenvalues()).cwiseAbs().maxCoeff());
        const Matrix recon = st.e * st.lambda.asDiagonal() * st.e.transpose();
        err = std::max(err, (recon - acc).cwiseAbs().maxCoeff());
    }
    return check("rank-one-update-oracle", err <= 1e-9, err, 1e-9);
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed, Index s) {
    if (s < 6) throw InvalidConfig("run_verification: s must be at least 6");
    std::vector<CheckResult> out;
    out.push_back(consistency_spectrum(seed, s));
    out.push_back(fast_path_equivalence(seed, s));
    out.push_back(projection_bounds(seed, s));
    out.push_back(information_loss_bound(seed, s));
    out.push_back(incremental_qr_span(seed, s));
    out.push_back(rank_one_update_oracle(seed, s));
    return out;
}

}  // namespace kprune
