#include "kprune/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kprune {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

void write_snapshot_csv(const std::string& path, const SnapshotSet& snaps) {
    const Index n = snaps.state_dim();
    std::string out;
    for (Index j = 0; j < n; ++j) out += "x" + std::to_string(j) + ",";
    for (Index j = 0; j < n; ++j) {
        out += "xp" + std::to_string(j);
        out += j + 1 < n ? "," : "";
    }
    out += "\n";
    for (Index i = 0; i < snaps.size(); ++i) {
        for (Index j = 0; j < n; ++j) out += format_double(snaps.x(i, j)) + ",";
        for (Index j = 0; j < n; ++j) {
            out += format_double(snaps.x_plus(i, j));
            out += j + 1 < n ? "," : "";
        }
        out += "\n";
    }
    write_text_file(path, out);
}

SnapshotSet read_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty snapshot CSV '" + path + "'");
    Index n = 0;
    {
        std::stringstream ss(header);
        std::string tok;
        Index total = 0;
        while (std::getline(ss, tok, ',')) ++total;
        if (total == 0 || total % 2 != 0)
            throw IoError("snapshot CSV '" + path + "' must have 2n columns");
        n = total / 2;
    }
    std::vector<double> vals;
    std::string line;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        Index got = 0;
        while (std::getline(ss, tok, ',')) {
            vals.push_back(std::stod(tok));
            ++got;
        }
        if (got != 2 * n) throw IoError("snapshot CSV '" + path + "': ragged row");
        ++rows;
    }
    SnapshotSet snaps;
    snaps.x.resize(rows, n);
    snaps.x_plus.resize(rows, n);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < 2 * n; ++j) {
            const double v = vals[static_cast<size_t>(i * 2 * n + j)];
            if (j < n)
                snaps.x(i, j) = v;
            else
                snaps.x_plus(i, j - n) = v;
        }
    return snaps;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
        throw IoError("matrix JSON: data length does not match rows*cols");
    Matrix m(rows, cols);
    Index k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[static_cast<size_t>(k++)].get<double>();
    return m;
}

namespace {

nlohmann::json config_to_json(const PruneConfig& c) {
    return nlohmann::json{{"eps", c.eps},
                          {"eps_coarse", c.eps_coarse},
                          {"use_fast_path", c.use_fast_path},
                          {"oracle_check_period", c.oracle_check_period},
                          {"rank_tol", c.rank_tol}};
}

PruneConfig config_from_json(const nlohmann::json& j) {
    PruneConfig c;
    c.eps = j.at("eps").get<double>();
    c.eps_coarse = j.at("eps_coarse").get<double>();
    c.use_fast_path = j.at("use_fast_path").get<bool>();
    c.oracle_check_period = j.at("oracle_check_period").get<int>();
    c.rank_tol = j.at("rank_tol").get<double>();
    return c;
}

PruneMode mode_from_name(const std::string& name) {
    if (name == "spv") return PruneMode::spv;
    if (name == "mpv") return PruneMode::mpv;
    if (name == "hybrid") return PruneMode::hybrid;
    throw IoError("unknown prune mode '" + name + "'");
}

nlohmann::json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

nlohmann::json report_to_json(const PruneReport& report, bool include_timings) {
    nlohmann::json trace = nlohmann::json::array();
    for (const TraceEntry& e : report.trace) {
        trace.push_back(nlohmann::json{{"generation", e.generation},
                                       {"dim", e.dim},
                                       {"delta", finite_or_null(e.delta)},
                                       {"gamma", finite_or_null(e.gamma)},
                                       {"dropped_count", e.dropped_count},
                                       {"wall_seconds", include_timings ? e.wall_seconds : 0.0}});
    }
    nlohmann::json j{{"schema_version", 1},
                     {"mode", prune_mode_name(report.mode)},
                     {"config", config_to_json(report.config)},
                     {"failed", report.failed()},
                     {"trace", std::move(trace)}};
    if (!report.failed()) {
        const SubspaceState& fin = *report.final;
        nlohmann::json theta = nlohmann::json::array();
        for (Index i = 0; i < fin.args.theta.size(); ++i) theta.push_back(fin.args.theta(i));
        j["final"] = nlohmann::json{{"dim", fin.dim},
                                    {"generation", fin.generation},
                                    {"theta", std::move(theta)},
                                    {"u_coeff", matrix_to_json(fin.args.u_coeff)}};
    } else {
        j["final"] = nullptr;
    }
    return j;
}

ReportSummary report_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1)
        throw IoError("unsupported report schema version");
    ReportSummary s;
    s.mode = mode_from_name(j.at("mode").get<std::string>());
    s.config = config_from_json(j.at("config"));
    s.failed = j.at("failed").get<bool>();
    for (const auto& e : j.at("trace")) {
        TraceEntry t;
        t.generation = e.at("generation").get<int>();
        t.dim = e.at("dim").get<Index>();
        t.delta = e.at("delta").is_null() ? std::nan("") : e.at("delta").get<double>();
        t.gamma = e.at("gamma").is_null() ? std::nan("") : e.at("gamma").get<double>();
        t.dropped_count = e.at("dropped_count").get<Index>();
        t.wall_seconds = e.at("wall_seconds").get<double>();
        s.trace.push_back(t);
    }
    if (!s.failed) {
        const auto& fin = j.at("final");
        s.final_dim = fin.at("dim").get<Index>();
        const auto& th = fin.at("theta");
        s.final_theta.resize(static_cast<Index>(th.size()));
        Index i = 0;
        for (const auto& v : th) s.final_theta(i++) = v.get<double>();
        s.final_u_coeff = matrix_from_json(fin.at("u_coeff"));
    }
    return s;
}

void write_trace_csv(const std::string& path, const PruneReport& report) {
    std::string out = "generation,dim,delta,gamma,dropped_count\n";
    for (const TraceEntry& e : report.trace) {
        out += std::to_string(e.generation) + "," + std::to_string(e.dim) + "," +
               format_double(e.delta) + "," + format_double(e.gamma) + "," +
               std::to_string(e.dropped_count) + "\n";
    }
    write_text_file(path, out);
}

void write_prediction_csv(const std::string& path,
                          const std::vector<PredictionTrace>& trace, Index state_dim) {
    std::string out = "t";
    for (Index j = 0; j < state_dim; ++j) out += ",x_pred" + std::to_string(j);
    out += ",e_state,e_lifted\n";
    for (const PredictionTrace& e : trace) {
        out += std::to_string(e.t);
        for (Index j = 0; j < state_dim; ++j) out += "," + format_double(e.x_pred(j));
        out += "," + format_double(e.e_state) + "," + format_double(e.e_lifted) + "\n";
    }
    write_text_file(path, out);
}

nlohmann::json model_to_json(const LiftedModel& model) {
    return nlohmann::json{{"schema_version", 1},
                          {"a_dyn", matrix_to_json(model.a_dyn)},
                          {"c_out", matrix_to_json(model.c_out)},
                          {"lift_coeff", matrix_to_json(model.lift_coeff)},
                          {"dict", dictionary_to_json(model.dict)},
                          {"z_norm_median", model.z_norm_median}};
}

LiftedModel model_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1)
        throw IoError("unsupported model schema version");
    LiftedModel m;
    m.a_dyn = matrix_from_json(j.at("a_dyn"));
    m.c_out = matrix_from_json(j.at("c_out"));
    m.lift_coeff = matrix_from_json(j.at("lift_coeff"));
    m.dict = dictionary_from_json(j.at("dict"));
    m.z_norm_median = j.at("z_norm_median").get<double>();
    return m;
}

}  // namespace kprune
