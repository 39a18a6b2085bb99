#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kprune/bench.hpp"
#include "kprune/io.hpp"
#include "kprune/model.hpp"
#include "kprune/pruning.hpp"
#include "kprune/synthetic.hpp"
#include "kprune/systems.hpp"
#include "kprune/verify.hpp"

namespace {

using namespace kprune;

Vector parse_vector(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    Vector v(static_cast<Index>(vals.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<size_t>(i)];
    return v;
}

SystemSpec::Kind parse_system(const std::string& name) {
    if (name == "benchmark2d") return SystemSpec::Kind::benchmark2d;
    if (name == "van_der_pol" || name == "vdp") return SystemSpec::Kind::van_der_pol;
    throw InvalidConfig("unknown system '" + name + "'");
}

PruneMode parse_algo(const std::string& name) {
    if (name == "spv") return PruneMode::spv;
    if (name == "mpv") return PruneMode::mpv;
    if (name == "hybrid") return PruneMode::hybrid;
    throw InvalidConfig("unknown algorithm '" + name + "'");
}

std::string default_sibling(const std::string& path, const std::string& suffix) {
    const size_t dot = path.find_last_of('.');
    return (dot == std::string::npos ? path : path.substr(0, dot)) + suffix;
}

int cmd_generate(const std::string& config, const std::string& system, double dt,
                 const std::string& lo, const std::string& hi, Index n_traj, Index traj_len,
                 std::uint64_t seed, const std::string& out) {
    SystemSpec spec;
    if (!config.empty()) {
        const ExperimentConfig exp = experiment_from_json(read_json_file(config));
        spec = exp.system;
        n_traj = exp.n_traj;
        traj_len = exp.traj_len;
    } else {
        spec.kind = parse_system(system);
        spec.dt = dt;
        spec.seed = seed;
        spec.domain.lo = parse_vector(lo);
        spec.domain.hi = parse_vector(hi);
    }
    const SnapshotSet snaps = generate_data(spec, n_traj, traj_len);
    write_snapshot_csv(out, snaps);
    std::cout << "wrote " << snaps.size() << " snapshot pairs to " << out << "\n";
    return 0;
}

int cmd_prune(const std::string& data_path, const std::string& dict_path,
              const std::string& algo, const PruneConfig& cfg, bool timings,
              const std::string& out, std::string trace_csv) {
    const SnapshotSet snaps = read_snapshot_csv(data_path);
    const Dictionary dict = dictionary_from_json(read_json_file(dict_path));
    const PreconditionResult pre = precondition(dict, snaps.x, cfg.rank_tol);
    const LiftedData data = lift(dict, pre.basis_coeff, snaps.x, snaps.x_plus);
    const SubspaceState state0 = initial_state(data, cfg.rank_tol);

    const PruneMode mode = parse_algo(algo);
    PruneReport report;
    switch (mode) {
        case PruneMode::spv: report = spv_prune(state0, cfg); break;
        case PruneMode::mpv: report = mpv_prune(state0, cfg); break;
        case PruneMode::hybrid: report = hybrid_prune(state0, cfg); break;
    }

    write_text_file(out, report_to_json(report, timings).dump(2) + "\n");
    if (trace_csv.empty()) trace_csv = default_sibling(out, "_trace.csv");
    write_trace_csv(trace_csv, report);

    if (report.failed()) {
        std::cout << "pruning failed: no subspace satisfies the tolerance (trace in " << trace_csv
                  << ")\n";
        return 1;
    }
    std::cout << "pruned " << state0.dim << " -> " << report.final->dim << " dims in "
              << report.final->generation << " generations, delta = "
              << format_double(invariance_proximity(report.final->args)) << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& report_path,
                const std::string& data_path, const std::string& dict_path, Index pick_dim,
                const std::string& x0_csv, int horizon, const std::string& truth_system,
                double dt, const std::string& out, const std::string& save_model) {
    const Vector x0 = parse_vector(x0_csv);

    std::optional<LiftedModel> model;
    if (!model_path.empty()) {
        model = model_from_json(read_json_file(model_path));
    } else {
        if (report_path.empty() || data_path.empty() || dict_path.empty())
            throw InvalidConfig("predict needs --model, or --report with --data and --dict");
        const ReportSummary summary = report_from_json(read_json_file(report_path));
        if (summary.failed && pick_dim == 0)
            throw InvalidConfig("report records a failed run; use --pick-dim to select a "
                                "trace generation");
        const SnapshotSet snaps = read_snapshot_csv(data_path);
        const Dictionary dict = dictionary_from_json(read_json_file(dict_path));

        if (pick_dim == 0) {
            const LiftedData data = lift(dict, summary.final_u_coeff, snaps.x, snaps.x_plus);
            model = build_model(data, snaps, dict, summary.config.rank_tol);
        } else {
            // Deterministic replay of the recorded run down to the requested
            // dimension (reports do not store intermediate bases).
            const PreconditionResult pre = precondition(dict, snaps.x, summary.config.rank_tol);
            const LiftedData data = lift(dict, pre.basis_coeff, snaps.x, snaps.x_plus);
            const SubspaceState state0 = initial_state(data, summary.config.rank_tol);
            std::optional<SubspaceState> picked;
            prune_with_observer(state0, summary.mode, summary.config,
                                [&](const SubspaceState& st) {
                                    if (!picked && st.dim == pick_dim) picked = st;
                                });
            if (!picked)
                throw InvalidConfig("no trace generation has dimension " +
                                    std::to_string(pick_dim));
            model = build_model(*picked, snaps, dict);
        }
    }

    std::optional<Matrix> truth;
    if (!truth_system.empty()) {
        SystemSpec spec;
        spec.kind = parse_system(truth_system);
        spec.dt = dt;
        truth = simulate(spec, x0, horizon);
    }

    const auto trace = predict(*model, x0, horizon, truth);
    write_prediction_csv(out, trace, model->dict.state_dim);
    if (!save_model.empty()) write_text_file(save_model, model_to_json(*model).dump(2) + "\n");

    if (!trace.empty() && trace.back().divergent) {
        std::cout << "rollout flagged divergent at step " << trace.back().t << "; trace in "
                  << out << "\n";
    } else {
        std::cout << "wrote " << trace.size() << " prediction steps to " << out << "\n";
    }
    return 0;
}

int cmd_bench(const std::string& dims_csv, const std::string& modes_csv,
              const BenchOptions& options, const std::string& out) {
    std::vector<Index> dims;
    {
        const Vector v = parse_vector(dims_csv);
        for (Index i = 0; i < v.size(); ++i) dims.push_back(static_cast<Index>(v(i)));
    }
    std::vector<std::string> modes;
    std::stringstream ss(modes_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) modes.push_back(tok);

    const auto rows = timing_harness(dims, modes, options);
    write_bench_csv(out, rows);
    std::printf("%6s  %-12s %14s %14s\n", "dim", "mode", "wall_s", "first_comp_s");
    for (const BenchRow& r : rows)
        std::printf("%6lld  %-12s %14.6f %14.6f\n", static_cast<long long>(r.dim),
                    r.mode.c_str(), r.wall_seconds, r.first_comp_seconds);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_verify(std::uint64_t seed, Index s) {
    const auto results = run_verification(seed, s);
    bool all = true;
    for (const CheckResult& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
        all = all && r.passed;
    }
    std::cout << (all ? "all checks passed" : "some checks FAILED") << "\n";
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman-invariant subspace identification via principal-vector pruning"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "simulate a benchmark system and write snapshot CSV");
    std::string g_config, g_system = "benchmark2d", g_lo = "0,0", g_hi = "2,2", g_out = "data.csv";
    double g_dt = 0.025;
    Index g_ntraj = 100, g_trajlen = 50;
    std::uint64_t g_seed = 1;
    gen->add_option("--config", g_config, "experiment JSON (overrides the system flags)");
    gen->add_option("--system", g_system, "benchmark2d or van_der_pol");
    gen->add_option("--dt", g_dt, "time step (van_der_pol)");
    gen->add_option("--lo", g_lo, "sampling box lower corner, comma separated");
    gen->add_option("--hi", g_hi, "sampling box upper corner, comma separated");
    gen->add_option("--n-traj", g_ntraj, "number of trajectories");
    gen->add_option("--traj-len", g_trajlen, "steps per trajectory");
    gen->add_option("--seed", g_seed, "RNG seed");
    gen->add_option("--out", g_out, "output CSV path");

    // prune
    auto* pr = app.add_subcommand("prune", "identify an approximately invariant subspace");
    std::string p_data, p_dict, p_algo = "hybrid", p_out = "report.json", p_trace;
    PruneConfig p_cfg;
    bool p_naive = false, p_timings = false;
    pr->add_option("--data", p_data, "snapshot CSV")->required();
    pr->add_option("--dict", p_dict, "dictionary JSON")->required();
    pr->add_option("--algo", p_algo, "spv, mpv or hybrid");
    pr->add_option("--eps", p_cfg.eps, "target invariance proximity");
    pr->add_option("--eps-coarse", p_cfg.eps_coarse, "hybrid coarse tolerance");
    pr->add_flag("--naive", p_naive, "recompute every generation from scratch");
    pr->add_option("--oracle-check-period", p_cfg.oracle_check_period,
                   "re-anchor the fast path every p generations");
    pr->add_option("--rank-tol", p_cfg.rank_tol, "relative rank tolerance");
    pr->add_flag("--timings", p_timings, "include wall-clock fields in the report");
    pr->add_option("--out", p_out, "report JSON path");
    pr->add_option("--trace-csv", p_trace, "dimension-vs-IPT CSV path");

    // predict
    auto* pd = app.add_subcommand("predict", "roll out a lifted model and write prediction CSV");
    std::string d_model, d_report, d_data, d_dict, d_x0 = "0,0", d_truth, d_out = "prediction.csv",
                d_save;
    Index d_pick = 0;
    int d_horizon = 100;
    double d_dt = 0.025;
    pd->add_option("--model", d_model, "model JSON (skips fitting)");
    pd->add_option("--report", d_report, "prune report JSON");
    pd->add_option("--data", d_data, "snapshot CSV used for the report");
    pd->add_option("--dict", d_dict, "dictionary JSON used for the report");
    pd->add_option("--pick-dim", d_pick, "select a nested subspace from the trace");
    pd->add_option("--x0", d_x0, "initial state, comma separated")->required();
    pd->add_option("--horizon", d_horizon, "prediction steps");
    pd->add_option("--truth-system", d_truth, "simulate this system for error columns");
    pd->add_option("--dt", d_dt, "truth-system time step");
    pd->add_option("--out", d_out, "prediction CSV path");
    pd->add_option("--save-model", d_save, "also write the fitted model JSON");

    // bench
    auto* bn = app.add_subcommand("bench", "timing comparison of pruning modes");
    std::string b_dims = "53,128", b_modes = "spv,spv_fast,mpv,mpv_fast,hybrid_fast",
                b_out = "bench.csv";
    BenchOptions b_opt;
    bn->add_option("--dims", b_dims, "dictionary sizes, comma separated");
    bn->add_option("--modes", b_modes, "modes to run");
    bn->add_option("--n-traj", b_opt.n_traj, "trajectories");
    bn->add_option("--traj-len", b_opt.traj_len, "steps per trajectory");
    bn->add_option("--seed", b_opt.seed, "RNG seed");
    bn->add_option("--eps", b_opt.eps, "target tolerance");
    bn->add_option("--eps-coarse", b_opt.eps_coarse, "hybrid coarse tolerance");
    bn->add_option("--repeats", b_opt.repeats, "runs per timing (median)");
    bn->add_option("--out", b_out, "bench CSV path");

    // verify
    auto* vf = app.add_subcommand("verify", "run oracle-equivalence and bound checks");
    std::uint64_t v_seed = 7;
    Index v_s = 20;
    vf->add_option("--seed", v_seed, "RNG seed");
    vf->add_option("--s", v_s, "instance dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_generate(g_config, g_system, g_dt, g_lo, g_hi, g_ntraj, g_trajlen, g_seed,
                                g_out);
        if (pr->parsed()) {
            p_cfg.use_fast_path = !p_naive;
            return cmd_prune(p_data, p_dict, p_algo, p_cfg, p_timings, p_out, p_trace);
        }
        if (pd->parsed())
            return cmd_predict(d_model, d_report, d_data, d_dict, d_pick, d_x0, d_horizon,
                               d_truth, d_dt, d_out, d_save);
        if (bn->parsed()) return cmd_bench(b_dims, b_modes, b_opt, b_out);
        if (vf->parsed()) return cmd_verify(v_seed, v_s);
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
