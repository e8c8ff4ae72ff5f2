#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/audit/audit.hpp"
#include "persona_lab/metrics/report.hpp"
#include "persona_lab/store/run_store.hpp"
#include "persona_lab/store/session_store.hpp"

// Offline stages that read stores and write reports. Nothing here talks to a
// model backend.
namespace persona_lab::pipeline {

struct GoldData {
  std::map<std::string, assessments::ItemAnswers> answers;
  std::map<std::string, assessments::MbtiReport> mbti;
  std::map<std::string, assessments::BigFiveBits> bigfive;
  std::vector<std::string> warnings;
};

// Self-reports of every participant in the store. Dilemma responses recorded
// against a different battery are skipped with a warning.
GoldData load_gold(const store::SessionStore& sessions, const assessments::Battery& battery);

struct RunData {
  simulation::RunManifest manifest;
  assessments::Battery battery;
  std::vector<simulation::PredictionSet> sets;
  std::vector<simulation::PersonalityPrediction> personality;
};

RunData load_run(const store::RunStore& runs, const std::string& run_id);

struct EvaluateOptions {
  metrics::EvaluationOptions evaluation;
  // Without it, gaps or missing cells raise GridMismatch.
  bool allow_gaps = false;
};

// Throws MissingGold naming the first participant without gold answers.
metrics::MetricReport evaluate(const GoldData& gold, const RunData& run,
                               const EvaluateOptions& options);
metrics::MetricReport evaluate_run(const store::SessionStore& sessions,
                                   const store::RunStore& runs, const std::string& run_id,
                                   const EvaluateOptions& options);

// Reads a single "<condition>.preds" file. The condition comes from the
// records (all must agree); an empty file takes it from the file name.
simulation::PredictionSet load_prediction_file(const std::filesystem::path& path);

audit::AuditReport audit(const GoldData& gold, const std::vector<simulation::PredictionSet>& sets,
                         const assessments::Battery& battery, const audit::AuditOptions& options,
                         const std::vector<audit::AnnotationRecord>* annotations = nullptr);

struct ReportFiles {
  std::filesystem::path json;
  std::filesystem::path csv;
};

// <dir>/<stem>.json (pretty, stable key order) and <dir>/<stem>.csv.
ReportFiles write_report(const std::filesystem::path& dir, const std::string& stem,
                         const nlohmann::json& document,
                         const std::vector<metrics::MetricRow>& rows);

}  // namespace persona_lab::pipeline
