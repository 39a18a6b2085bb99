#include "kprune/pruning.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "kprune/kernels.hpp"

namespace kprune {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sine_of_last(const Vector& theta) {
    return theta.size() > 0 ? std::sin(theta(theta.size() - 1)) : 0.0;
}

// Chain of k rank-one eigen-updates on the truncated sine spectrum: starting
// from diag(sin^2 theta_1..keep), add the outer product of the first `keep`
// entries of each update column. Eigenvalues of the result are the squared
// sines of the pruned pair; eigenvectors re-align the retained basis.
std::pair<Vector, Matrix> sine_update_chain(const Vector& theta, const Matrix& dcos,
                                            Index keep) {
    SymmetricEigUpdateState st;
    st.lambda.resize(keep);
    for (Index i = 0; i < keep; ++i) {
        const double s = std::sin(theta(i));
        st.lambda(i) = s * s;
    }
    st.e = Matrix::Identity(keep, keep);
    for (Index l = 0; l < dcos.cols(); ++l)
        st = rank_one_eig_update(st, dcos.col(l).head(keep));
    Vector th(keep);
    for (Index i = 0; i < keep; ++i) {
        double lam = st.lambda(i);
        if (lam < 0.0) lam = 0.0;
        if (lam > 1.0) lam = 1.0;
        th(i) = std::asin(std::sqrt(lam));
    }
    return {std::move(th), std::move(st.e)};
}

// Last k image-basis columns in reverse order: the update vectors walk the
// dropped directions from the least invariant inward.
Matrix reversed_tail_columns(const Matrix& m, Index k) {
    Matrix out(m.rows(), k);
    for (Index l = 0; l < k; ++l) out.col(l) = m.col(m.cols() - 1 - l);
    return out;
}

// From-scratch recomputation after dropping the top k principal vectors.
PrincipalArguments naive_drop(const PrincipalArguments& args, Index k, double rank_tol) {
    const Index keep = args.theta.size() - k;
    const Matrix basis = args.u_eval.leftCols(keep);
    const Matrix image =
        kernels::multiply_ab(args.image_qr.q, args.image_qr.r.leftCols(keep));
    return principal_arguments_core(basis, image, args.u_coeff.leftCols(keep), rank_tol);
}

// Compact engine state for the fast path. All per-generation work happens on
// s x s' coefficient matrices relative to the fixed initial bases; the data
// dimension N is touched once at initialization and once at materialization.
struct Engine {
    Matrix qa0;      // N x s : initial principal-vector basis
    Matrix w0;       // N x s : initial image basis
    Matrix g;        // s x s : qa0^T w0
    Matrix ucoeff0;  // s_raw x s
    Vector theta;    // s'
    Matrix ua;       // s x s' : cumulative basis transform
    Matrix wb;       // s x s' : cumulative image-basis transform
    Matrix rimg;     // s' x s'

    Index dim() const { return theta.size(); }

    explicit Engine(const PrincipalArguments& args)
        : qa0(args.u_eval),
          w0(args.image_qr.q),
          g(kernels::multiply_at_b(args.u_eval, args.image_qr.q)),
          ucoeff0(args.u_coeff),
          theta(args.theta),
          ua(Matrix::Identity(args.theta.size(), args.theta.size())),
          wb(Matrix::Identity(args.theta.size(), args.theta.size())),
          rimg(args.image_qr.r) {}

    void fast_drop(Index k, double rank_tol) {
        const Index keep = dim() - k;
        const Matrix wk = reversed_tail_columns(wb, k);
        const Matrix dcos = ua.transpose() * (g * wk);  // <U, W_k> in coefficients
        auto [th, e] = sine_update_chain(theta, dcos, keep);
        Matrix t = Matrix::Zero(dim(), keep);
        t.topRows(keep) = e;
        ThinQR small = thin_qr(rimg * t);
        if (!small.full_rank(rank_tol))
            throw RankDeficientUpdate("fast path: image update is rank deficient");
        ua = (ua * t).eval();
        wb = (wb * small.q).eval();
        rimg = std::move(small.r);
        theta = std::move(th);
    }

    PrincipalArguments materialize() const {
        PrincipalArguments out;
        out.theta = theta;
        out.u_eval = kernels::multiply_ab(qa0, ua);
        out.u_coeff = ucoeff0 * ua;
        out.image_qr.q = kernels::multiply_ab(w0, wb);
        out.image_qr.r = rimg;
        return out;
    }
};

void validate(const PruneConfig& cfg, bool hybrid) {
    if (!(cfg.eps >= 0.0 && cfg.eps < 1.0))
        throw InvalidConfig("prune: eps must lie in [0, 1)");
    if (hybrid && !(cfg.eps < cfg.eps_coarse && cfg.eps_coarse <= 1.0))
        throw InvalidConfig("prune: hybrid needs eps < eps_coarse <= 1");
    if (cfg.rank_tol <= 0.0) throw InvalidConfig("prune: rank_tol must be positive");
}

PruneReport run_prune(const SubspaceState& init, PruneMode drop_rule, PruneMode record_mode,
                      const PruneConfig& cfg, const GenerationObserver& observer,
                      bool observe_initial = true) {
    PruneReport rep;
    rep.mode = record_mode;
    rep.config = cfg;

    int gen = init.generation;
    if (init.dim == 0) {
        rep.trace.push_back({gen, 0, kNaN, kNaN, 0, 0.0});
        return rep;
    }

    const bool fast = cfg.use_fast_path;
    std::optional<Engine> eng;
    PrincipalArguments cur;
    if (fast)
        eng.emplace(init.args);
    else
        cur = init.args;

    const auto theta_now = [&]() -> const Vector& { return fast ? eng->theta : cur.theta; };
    const auto materialize_now = [&]() -> SubspaceState {
        SubspaceState s;
        s.args = fast ? eng->materialize() : cur;
        s.dim = s.args.theta.size();
        s.generation = gen;
        return s;
    };

    rep.trace.push_back({gen, theta_now().size(), sine_of_last(theta_now()), kNaN, 0, 0.0});
    if (observer && observe_initial) observer(materialize_now());

    while (true) {
        const Index dim = theta_now().size();
        const double delta = sine_of_last(theta_now());
        if (delta <= cfg.eps) {
            rep.final = materialize_now();
            return rep;
        }

        Index k = 1;
        if (drop_rule == PruneMode::mpv) {
            Index first_violating = dim;
            for (Index j = 0; j < dim; ++j)
                if (std::sin(theta_now()(j)) > cfg.eps) {
                    first_violating = j;
                    break;
                }
            k = dim - first_violating;
        }
        const double gamma = std::sin(theta_now()(dim - k));

        const auto t0 = std::chrono::steady_clock::now();
        ++gen;
        if (k == dim) {
            rep.trace.push_back({gen, 0, kNaN, gamma, k, seconds_since(t0)});
            return rep;  // empty subspace: failure
        }

        if (fast) {
            try {
                eng->fast_drop(k, cfg.rank_tol);
            } catch (const RankDeficientUpdate&) {
                // Degenerate image directions; re-anchor through a fresh SVD.
                eng.emplace(naive_drop(eng->materialize(), k, cfg.rank_tol));
            }
            if (cfg.oracle_check_period > 0 && gen % cfg.oracle_check_period == 0) {
                PrincipalArguments fresh = naive_drop(eng->materialize(), 0, cfg.rank_tol);
                if ((fresh.theta - eng->theta).cwiseAbs().maxCoeff() > 1e-6)
                    throw Error("prune: fast path diverged from the from-scratch oracle");
                eng.emplace(std::move(fresh));
            }
        } else {
            cur = naive_drop(cur, k, cfg.rank_tol);
        }

        rep.trace.push_back(
            {gen, theta_now().size(), sine_of_last(theta_now()), gamma, k, seconds_since(t0)});
        if (observer) observer(materialize_now());
    }
}

PruneReport run_hybrid(const SubspaceState& init, const PruneConfig& cfg,
                       const GenerationObserver& observer) {
    validate(cfg, true);
    PruneConfig coarse = cfg;
    coarse.eps = cfg.eps_coarse;
    PruneReport rep = run_prune(init, PruneMode::mpv, PruneMode::hybrid, coarse, observer);
    rep.config = cfg;
    if (rep.failed()) return rep;

    const SubspaceState handoff = *rep.final;
    PruneReport fine = run_prune(handoff, PruneMode::spv, PruneMode::hybrid, cfg, observer,
                                 /*observe_initial=*/false);
    // The fine stage re-evaluates the handoff state; skip the duplicate entry.
    rep.trace.insert(rep.trace.end(), fine.trace.begin() + 1, fine.trace.end());
    rep.final = std::move(fine.final);
    return rep;
}

}  // namespace

const char* prune_mode_name(PruneMode mode) {
    switch (mode) {
        case PruneMode::spv: return "spv";
        case PruneMode::mpv: return "mpv";
        case PruneMode::hybrid: return "hybrid";
    }
    return "unknown";
}

SubspaceState initial_state(const LiftedData& data, double rank_tol) {
    SubspaceState s;
    s.args = principal_arguments(data, rank_tol);
    s.dim = s.args.theta.size();
    s.generation = 0;
    return s;
}

PruneReport spv_prune(const SubspaceState& state, const PruneConfig& config) {
    validate(config, false);
    return run_prune(state, PruneMode::spv, PruneMode::spv, config, {});
}

PruneReport mpv_prune(const SubspaceState& state, const PruneConfig& config) {
    validate(config, false);
    return run_prune(state, PruneMode::mpv, PruneMode::mpv, config, {});
}

PruneReport hybrid_prune(const SubspaceState& state, const PruneConfig& config) {
    return run_hybrid(state, config, {});
}

PruneReport prune_with_observer(const SubspaceState& state, PruneMode mode,
                                const PruneConfig& config,
                                const GenerationObserver& observer) {
    if (mode == PruneMode::hybrid) return run_hybrid(state, config, observer);
    validate(config, false);
    return run_prune(state, mode, mode, config, observer);
}

PrincipalArguments fast_recompute(const PrincipalArguments& args, Index k,
                                  double rank_tol) {
    const Index s = args.theta.size();
    if (k < 1 || k >= s)
        throw InvalidConfig("fast_recompute: drop count must satisfy 1 <= k < s");
    const Index keep = s - k;
    const Matrix wk = reversed_tail_columns(args.image_qr.q, k);
    const Matrix dcos = kernels::multiply_at_b(args.u_eval, wk);
    auto [th, e] = sine_update_chain(args.theta, dcos, keep);
    Matrix t = Matrix::Zero(s, keep);
    t.topRows(keep) = e;

    PrincipalArguments out;
    out.theta = std::move(th);
    out.u_eval = kernels::multiply_ab(args.u_eval, t);
    out.u_coeff = args.u_coeff * t;
    out.image_qr = incremental_qr(args.image_qr.q, args.image_qr.r, t, rank_tol);
    return out;
}

double eigenfunction_distance(const Vector& f_eval, const SubspaceState& state) {
    if (f_eval.size() != state.args.u_eval.rows())
        throw DimensionMismatch("eigenfunction_distance: evaluation length mismatch");
    const double nrm = f_eval.norm();
    if (!(nrm > 1e-300)) throw ZeroFunction("eigenfunction_distance: function vanishes on the data");
    const Vector f = f_eval / nrm;
    const Vector proj = kernels::multiply_at_b(state.args.u_eval, f);
    return (f - state.args.u_eval * proj).norm();
}

double eigenfunction_distance(const Vector& f_coeff, const Dictionary& dict,
                              const Matrix& x, const SubspaceState& state) {
    if (f_coeff.size() != dict.size())
        throw DimensionMismatch("eigenfunction_distance: coefficient length mismatch");
    const Index n_rows = x.rows();
    Vector f_eval = Vector::Zero(n_rows);
    for (Index j = 0; j < dict.size(); ++j) {
        const double c = f_coeff(j);
        if (c == 0.0) continue;
        const Observable& obs = dict.observables[static_cast<size_t>(j)];
        for (Index i = 0; i < n_rows; ++i) {
            Vector xi = x.row(i);
            f_eval(i) += c * obs(xi.data(), dict.state_dim);
        }
    }
    return eigenfunction_distance(f_eval, state);
}

}  // namespace kprune
