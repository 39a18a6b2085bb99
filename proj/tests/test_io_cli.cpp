#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kprune/io.hpp"
#include "kprune/model.hpp"
#include "kprune/pruning.hpp"
#include "kprune/systems.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace kprune;
using namespace kprune::testing;

namespace {

std::string g_cli_path;
fs::path g_tmp;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " > " + (g_tmp / "cli.log").string() + " 2>&1";
    return std::system(cmd.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path self = fs::absolute(argv[0]);
    g_cli_path = (self.parent_path() / "kprune").string();
    g_tmp = fs::temp_directory_path() / "kprune_cli_test";
    fs::create_directories(g_tmp);
    doctest::Context ctx(argc, argv);
    const int rc = ctx.run();
    return rc;
}

TEST_CASE("snapshot csv round trip is exact") {
    SystemSpec spec;
    spec.kind = SystemSpec::Kind::van_der_pol;
    spec.seed = 5;
    spec.domain.lo = Vector::Constant(2, -4.0);
    spec.domain.hi = Vector::Constant(2, 4.0);
    const SnapshotSet snaps = generate_data(spec, 8, 12);

    const auto path = (g_tmp / "snaps.csv").string();
    write_snapshot_csv(path, snaps);
    const SnapshotSet back = read_snapshot_csv(path);
    CHECK(max_abs_diff(back.x, snaps.x) == 0.0);
    CHECK(max_abs_diff(back.x_plus, snaps.x_plus) == 0.0);

    // Deterministic bytes: writing twice yields identical files.
    const auto path2 = (g_tmp / "snaps2.csv").string();
    write_snapshot_csv(path2, snaps);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("matrix json round trip") {
    const Matrix m = random_matrix(3, 7, 4);
    const Matrix back = matrix_from_json(matrix_to_json(m));
    CHECK(max_abs_diff(back, m) == 0.0);
    CHECK_THROWS_AS(matrix_from_json(nlohmann::json{{"rows", 2}, {"cols", 2}, {"data", {1.0}}}),
                    IoError);
}

TEST_CASE("report json carries the trace and final basis") {
    Vector theta(8);
    theta << 0.01, 0.05, 0.1, 0.15, 0.5, 0.8, 1.1, 1.4;
    const SyntheticInstance inst = synthetic_instance(6, 80, theta);
    PruneConfig cfg;
    cfg.eps = 0.2;
    const PruneReport rep = spv_prune(initial_state(inst.data), cfg);
    REQUIRE(!rep.failed());

    const nlohmann::json j = report_to_json(rep, false);
    const ReportSummary sum = report_from_json(j);
    CHECK(sum.mode == PruneMode::spv);
    CHECK(sum.failed == rep.failed());
    REQUIRE(sum.trace.size() == rep.trace.size());
    for (size_t i = 0; i < sum.trace.size(); ++i) {
        CHECK(sum.trace[i].dim == rep.trace[i].dim);
        CHECK(sum.trace[i].generation == rep.trace[i].generation);
    }
    CHECK(sum.final_dim == rep.final->dim);
    CHECK(max_abs_diff(sum.final_u_coeff, rep.final->args.u_coeff) == 0.0);
    // Timings excluded by default.
    CHECK(j.at("trace").at(1).at("wall_seconds").get<double>() == 0.0);
}

TEST_CASE("model json round trip preserves predictions") {
    Dictionary dict = monomial_dictionary(2, 2);
    SnapshotSet snaps;
    snaps.x = random_matrix(7, 200, 2);
    Matrix m(2, 2);
    m << 0.9, 0.1, 0.0, 0.8;
    snaps.x_plus = snaps.x * m.transpose();
    const PreconditionResult pre = precondition(dict, snaps.x, 1e-10);
    const LiftedData data = lift(dict, pre.basis_coeff, snaps.x, snaps.x_plus);
    const LiftedModel model = build_model(data, snaps, dict);

    const LiftedModel back = model_from_json(model_to_json(model));
    Vector x0(2);
    x0 << 0.3, -0.2;
    const auto t1 = predict(model, x0, 20);
    const auto t2 = predict(back, x0, 20);
    REQUIRE(t1.size() == t2.size());
    for (size_t i = 0; i < t1.size(); ++i)
        CHECK(max_abs_diff(t1[i].x_pred, t2[i].x_pred) == 0.0);
}

TEST_CASE("cli pipeline: generate, prune, predict, verify") {
    REQUIRE(fs::exists(g_cli_path));
    const auto data = (g_tmp / "data.csv").string();
    const auto dict = (g_tmp / "dict.json").string();
    const auto report = (g_tmp / "report.json").string();
    const auto pred = (g_tmp / "pred.csv").string();

    CHECK(run_cli("generate --system benchmark2d --lo 0,0 --hi 2,2 --n-traj 40 --traj-len 25 "
                  "--seed 11 --out " + data) == 0);

    const nlohmann::json dict_json = {
        {"state_dim", 2},
        {"observables",
         {{{"kind", "monomials"}, {"max_degree", 3}},
          {{"kind", "gaussian_grid"}, {"lo", {0.0, 0.0}}, {"hi", {2.0, 2.0}}, {"per_axis", 2},
           {"width", 0.8}}}}};
    write_text_file(dict, dict_json.dump(2));

    CHECK(run_cli("prune --data " + data + " --dict " + dict +
                  " --algo hybrid --eps 1e-3 --eps-coarse 0.1 --out " + report) == 0);
    CHECK(fs::exists(report));
    CHECK(fs::exists(g_tmp / "report_trace.csv"));

    const ReportSummary sum = report_from_json(read_json_file(report));
    CHECK(!sum.failed);
    CHECK(sum.final_dim >= 4);

    CHECK(run_cli("predict --report " + report + " --data " + data + " --dict " + dict +
                  " --x0 1.0,1.0 --horizon 20 --truth-system benchmark2d --out " + pred) == 0);
    const std::string pred_text = slurp(pred);
    CHECK(pred_text.find("t,x_pred0,x_pred1,e_state,e_lifted") == 0);

    CHECK(run_cli("verify --seed 7 --s 12") == 0);

    // Determinism: byte-identical outputs for identical runs.
    const auto report2 = (g_tmp / "report2.json").string();
    CHECK(run_cli("prune --data " + data + " --dict " + dict +
                  " --algo hybrid --eps 1e-3 --eps-coarse 0.1 --out " + report2) == 0);
    CHECK(slurp(report) == slurp(report2));

    // Usage errors exit with 2.
    CHECK(run_cli("prune --data missing.csv --dict " + dict + " --out x.json") != 0);
    const int rc = std::system((g_cli_path + " prune --data missing.csv --dict " + dict +
                                " --out x.json > /dev/null 2>&1")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}

TEST_CASE("cli prune exits 1 when pruning fails") {
    const auto data = (g_tmp / "data.csv").string();
    REQUIRE(fs::exists(data));
    // Junk-only dictionary: both directions leave the span, so pruning at a
    // tight tolerance ends in the empty subspace.
    const nlohmann::json dict_json = {
        {"state_dim", 2},
        {"observables",
         {{{"kind", "monomial"}, {"exponents", {0, 1}}},
          {{"kind", "monomial"}, {"exponents", {1, 1}}}}}};
    const auto dict = (g_tmp / "junk_dict.json").string();
    write_text_file(dict, dict_json.dump(2));
    const auto report = (g_tmp / "junk_report.json").string();
    const int rc = std::system((g_cli_path + " prune --data " + data + " --dict " + dict +
                                " --algo spv --eps 1e-6 --out " + report + " > /dev/null 2>&1")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) == 1);
    const ReportSummary sum = report_from_json(read_json_file(report));
    CHECK(sum.failed);
    CHECK(sum.trace.back().dim == 0);
}

TEST_CASE("cli bench writes the timing table") {
    const auto out = (g_tmp / "bench.csv").string();
    CHECK(run_cli("bench --dims 12 --modes spv,spv_fast --n-traj 200 --traj-len 5 --repeats 1 "
                  "--out " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("dim,mode,wall_seconds,first_comp_seconds") == 0);
    CHECK(text.find("12,spv,") != std::string::npos);
    CHECK(text.find("12,spv_fast,") != std::string::npos);
}

TEST_CASE("cli predict with pick-dim replays the trace") {
    const auto data = (g_tmp / "data.csv").string();
    const auto dict = (g_tmp / "dict.json").string();
    const auto report = (g_tmp / "report.json").string();
    REQUIRE(fs::exists(data));

    const ReportSummary sum = report_from_json(read_json_file(report));
    REQUIRE(sum.trace.size() >= 2);
    const Index mid = sum.trace[sum.trace.size() / 2].dim;

    const auto pred = (g_tmp / "pred_mid.csv").string();
    CHECK(run_cli("predict --report " + report + " --data " + data + " --dict " + dict +
                  " --pick-dim " + std::to_string(mid) +
                  " --x0 1.0,1.0 --horizon 5 --truth-system benchmark2d --out " + pred) == 0);
    CHECK(fs::exists(pred));

    const int rc = std::system((g_cli_path + " predict --report " + report + " --data " + data +
                                " --dict " + dict +
                                " --pick-dim 9999 --x0 1,1 --horizon 5 --out " +
                                (g_tmp / "nope.csv").string() + " > /dev/null 2>&1")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}
