#include "kprune/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kprune/kernels.hpp"

namespace kprune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceFactor = 1e6;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lo + hi);
    }
    return hi;
}

}  // namespace

Vector LiftedModel::lift(const Vector& x) const {
    if (x.size() != dict.state_dim) throw DimensionMismatch("lift: state dimension mismatch");
    Matrix row(1, x.size());
    row.row(0) = x;
    const Matrix raw = evaluate(dict, row);
    return (raw * lift_coeff).row(0);
}

LiftedModel build_model(const SubspaceState& state, const SnapshotSet& data,
                        const Dictionary& dict) {
    const Index n_rows = data.size();
    if (state.args.u_eval.rows() != n_rows)
        throw DimensionMismatch("build_model: snapshot count does not match the state");
    if (data.state_dim() != dict.state_dim)
        throw DimensionMismatch("build_model: state dimension mismatch");

    LiftedModel model;
    model.dict = dict;
    model.lift_coeff = state.args.u_coeff;

    // EDMD on the orthonormal pruned basis: for training lifted states
    // Z = sqrt(N) u_eval, the least-squares dynamics are
    // a_dyn^T = Z^+ Z_plus = u_eval^T (w r).
    const Matrix wtu = kernels::multiply_at_b(state.args.image_qr.q, state.args.u_eval);
    model.a_dyn = state.args.image_qr.r.transpose() * wtu;

    // Reconstruction: projection coefficients of each coordinate observable.
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_rows));
    model.c_out = kernels::multiply_at_b(data.x, state.args.u_eval).eval() * inv_sqrt_n;

    std::vector<double> norms(static_cast<size_t>(n_rows));
    const double sqrt_n = std::sqrt(static_cast<double>(n_rows));
    for (Index i = 0; i < n_rows; ++i)
        norms[static_cast<size_t>(i)] = sqrt_n * state.args.u_eval.row(i).norm();
    model.z_norm_median = median(std::move(norms));
    return model;
}

LiftedModel build_model(const LiftedData& data, const SnapshotSet& snaps,
                        const Dictionary& dict, double rank_tol) {
    SubspaceState state;
    state.args = principal_arguments(data, rank_tol);
    state.dim = state.args.theta.size();
    return build_model(state, snaps, dict);
}

std::vector<PredictionTrace> predict(const LiftedModel& model, const Vector& x0,
                                     int horizon, const std::optional<Matrix>& truth) {
    if (horizon < 1) throw InvalidConfig("predict: horizon must be at least 1");
    if (x0.size() != model.dict.state_dim)
        throw DimensionMismatch("predict: initial state dimension mismatch");
    if (truth && (truth->rows() < horizon + 1 || truth->cols() != model.dict.state_dim))
        throw DimensionMismatch("predict: truth trajectory must cover rows 0..horizon");

    const double z_limit = kDivergenceFactor * std::max(model.z_norm_median, 1e-300);
    std::vector<PredictionTrace> out;
    out.reserve(static_cast<size_t>(horizon) + 1);

    Vector z = model.lift(x0);
    for (int t = 0; t <= horizon; ++t) {
        PredictionTrace e;
        e.t = t;
        e.z_pred = z;
        e.x_pred = model.c_out * z;
        e.divergent = !(z.norm() <= z_limit);
        if (truth) {
            if (e.divergent) {
                e.e_state = kInf;
                e.e_lifted = kInf;
            } else {
                const Vector xt = truth->row(t);
                e.e_state = (xt - e.x_pred).norm();
                e.e_lifted = (model.lift(xt) - z).norm();
            }
        }
        const bool stop = e.divergent;
        out.push_back(std::move(e));
        if (stop) break;
        if (t < horizon) z = model.a_dyn * z;
    }
    return out;
}

std::vector<TradeoffRow> tradeoff_scan(const LiftedData& data, const Dictionary& dict,
                                       const SnapshotSet& snaps, const PruneReport& report,
                                       int horizon, const Vector& x0,
                                       const Matrix& truth) {
    std::vector<TradeoffRow> rows;
    const Index n = snaps.state_dim();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(snaps.size()));

    const auto scan_state = [&](const SubspaceState& state) {
        TradeoffRow row;
        row.dim = state.dim;
        row.delta = invariance_proximity(state.args);
        row.recon_per_coord.resize(n);
        for (Index j = 0; j < n; ++j) {
            const Vector ej = snaps.x.col(j) * inv_sqrt_n;
            const Vector proj = kernels::multiply_at_b(state.args.u_eval, ej);
            row.recon_per_coord(j) = (ej - state.args.u_eval * proj).norm();
        }
        row.recon_error = row.recon_per_coord.norm();

        const LiftedModel model = build_model(state, snaps, dict);
        const auto trace = predict(model, x0, horizon, truth);
        row.state_error_at_horizon =
            trace.size() == static_cast<size_t>(horizon) + 1 ? trace.back().e_state : kInf;
        rows.push_back(std::move(row));
    };

    SubspaceState state0 = initial_state(data, report.config.rank_tol);
    prune_with_observer(state0, report.mode, report.config, scan_state);

    // The replay must walk the same nested subspaces the report recorded.
    size_t live = 0;
    for (const TraceEntry& e : report.trace)
        if (e.dim > 0) ++live;
    if (rows.size() != live)
        throw Error("tradeoff_scan: replay did not reproduce the report's trace");
    for (size_t i = 0, j = 0; i < report.trace.size(); ++i) {
        if (report.trace[i].dim == 0) continue;
        if (rows[j].dim != report.trace[i].dim)
            throw Error("tradeoff_scan: replay dimensions diverge from the report");
        ++j;
    }
    return rows;
}

}  // namespace kprune
