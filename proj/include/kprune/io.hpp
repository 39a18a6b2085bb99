#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kprune/model.hpp"
#include "kprune/pruning.hpp"
#include "kprune/systems.hpp"

namespace kprune {

// Doubles are printed with %.17g everywhere so outputs round-trip exactly and
// identical runs produce byte-identical files.
std::string format_double(double x);

// Snapshot CSV: header x0..x{n-1},xp0..xp{n-1}, one pair per row.
void write_snapshot_csv(const std::string& path, const SnapshotSet& snaps);
SnapshotSet read_snapshot_csv(const std::string& path);

// Matrices in JSON: {"rows": r, "cols": c, "data": [row-major]}.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

// PruneReport JSON, schema_version 1. Wall-clock fields are zeroed unless
// include_timings is set, keeping default outputs reproducible.
nlohmann::json report_to_json(const PruneReport& report, bool include_timings);

struct ReportSummary {
    PruneMode mode = PruneMode::spv;
    PruneConfig config;
    bool failed = false;
    std::vector<TraceEntry> trace;
    Index final_dim = 0;
    Vector final_theta;
    Matrix final_u_coeff;
};

ReportSummary report_from_json(const nlohmann::json& j);

// Trace CSV (dimension vs invariance proximity): generation,dim,delta,gamma,dropped_count.
void write_trace_csv(const std::string& path, const PruneReport& report);

// Prediction CSV: t,x_pred0..x_pred{n-1},e_state,e_lifted.
void write_prediction_csv(const std::string& path,
                          const std::vector<PredictionTrace>& trace, Index state_dim);

nlohmann::json model_to_json(const LiftedModel& model);
LiftedModel model_from_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);
nlohmann::json read_json_file(const std::string& path);

}  // namespace kprune
