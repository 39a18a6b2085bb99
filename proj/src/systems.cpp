#include "kprune/systems.hpp"

#include <cmath>
#include <string>

#include "kprune/parallel.hpp"
#include "kprune/rng.hpp"

namespace kprune {

Vector step_benchmark2d(const Vector& x) {
    if (x.size() != 2) throw DimensionMismatch("step_benchmark2d: state must be 2-dimensional");
    const double rad = 0.9 * x(1) * x(1) + x(0) + 0.1;
    if (rad < 0.0)
        throw NegativeRadicand("step_benchmark2d: 0.9 x2^2 + x1 + 0.1 is negative at x1 = " +
                               std::to_string(x(0)));
    Vector next(2);
    next(0) = 0.8 * x(0);
    next(1) = std::sqrt(rad);
    return next;
}

Vector step_van_der_pol(const Vector& x, double dt) {
    if (x.size() != 2) throw DimensionMismatch("step_van_der_pol: state must be 2-dimensional");
    Vector next(2);
    next(0) = x(0) + dt * x(1);
    next(1) = x(1) + dt * ((1.0 - x(0) * x(0)) * x(1) - x(0));
    return next;
}

Vector step_system(const SystemSpec& spec, const Vector& x) {
    switch (spec.kind) {
        case SystemSpec::Kind::benchmark2d: return step_benchmark2d(x);
        case SystemSpec::Kind::van_der_pol: return step_van_der_pol(x, spec.dt);
    }
    throw InvalidConfig("step_system: unknown system kind");
}

SnapshotSet generate_data(const SystemSpec& spec, Index n_traj, Index traj_len) {
    if (n_traj < 1 || traj_len < 1)
        throw InvalidConfig("generate_data: trajectory counts must be positive");
    const Index n = spec.domain.lo.size();
    if (n == 0 || spec.domain.hi.size() != n)
        throw InvalidConfig("generate_data: sampling domain is empty");

    const Index total = n_traj * traj_len;
    SnapshotSet out;
    out.x.resize(total, n);
    out.x_plus.resize(total, n);

    bool bad_radicand = false;
    const int nt = parallel::thread_count();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (Index t = 0; t < n_traj; ++t) {
        CounterRng rng(spec.seed, static_cast<std::uint64_t>(t));
        Vector cur(n);
        for (Index i = 0; i < n; ++i) cur(i) = rng.uniform(spec.domain.lo(i), spec.domain.hi(i));
        try {
            for (Index k = 0; k < traj_len; ++k) {
                const Vector next = step_system(spec, cur);
                const Index row = t * traj_len + k;
                out.x.row(row) = cur;
                out.x_plus.row(row) = next;
                cur = next;
            }
        } catch (const NegativeRadicand&) {
#pragma omp atomic write
            bad_radicand = true;
        }
    }
    if (bad_radicand)
        throw NegativeRadicand("generate_data: benchmark2d left its valid domain; "
                               "check the sampling box");
    return out;
}

Matrix simulate(const SystemSpec& spec, const Vector& x0, Index steps) {
    Matrix out(steps + 1, x0.size());
    Vector cur = x0;
    out.row(0) = cur;
    for (Index k = 1; k <= steps; ++k) {
        cur = step_system(spec, cur);
        out.row(k) = cur;
    }
    return out;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const auto& sys = j.at("system");
    const std::string kind = sys.at("kind").get<std::string>();
    if (kind == "benchmark2d")
        cfg.system.kind = SystemSpec::Kind::benchmark2d;
    else if (kind == "van_der_pol")
        cfg.system.kind = SystemSpec::Kind::van_der_pol;
    else
        throw InvalidConfig("experiment_from_json: unknown system kind '" + kind + "'");
    if (sys.contains("dt")) cfg.system.dt = sys.at("dt").get<double>();
    if (cfg.system.dt <= 0.0) throw InvalidConfig("experiment_from_json: dt must be positive");
    const auto read_vec = [](const nlohmann::json& arr) {
        Vector v(static_cast<Index>(arr.size()));
        Index i = 0;
        for (const auto& x : arr) v(i++) = x.get<double>();
        return v;
    };
    cfg.system.domain.lo = read_vec(sys.at("domain_lo"));
    cfg.system.domain.hi = read_vec(sys.at("domain_hi"));
    cfg.system.seed = sys.value("seed", 0ULL);

    cfg.n_traj = j.at("n_traj").get<Index>();
    cfg.traj_len = j.at("traj_len").get<Index>();
    if (cfg.n_traj < 1 || cfg.traj_len < 1)
        throw InvalidConfig("experiment_from_json: counts must be positive");
    cfg.dictionary = j.at("dictionary");

    if (j.contains("prune")) {
        const auto& p = j.at("prune");
        cfg.prune.eps = p.value("eps", cfg.prune.eps);
        cfg.prune.eps_coarse = p.value("eps_coarse", cfg.prune.eps_coarse);
        cfg.prune.use_fast_path = p.value("use_fast_path", cfg.prune.use_fast_path);
        cfg.prune.oracle_check_period = p.value("oracle_check_period", cfg.prune.oracle_check_period);
        cfg.prune.rank_tol = p.value("rank_tol", cfg.prune.rank_tol);
    }
    if (j.contains("prediction")) {
        cfg.x0 = read_vec(j.at("prediction").at("x0"));
        cfg.horizon = j.at("prediction").at("horizon").get<int>();
    }
    return cfg;
}

}  // namespace kprune
