#include "persona_lab/pipeline/pipeline.hpp"

#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using simulation::Condition;

GoldData load_gold(const store::SessionStore& sessions, const assessments::Battery& battery) {
  GoldData gold;
  const auto hash = assessments::battery_hash(battery);
  for (const auto& alias : sessions.list_aliases()) {
    if (auto r = assessments::load_responses(sessions, alias)) {
      if (r->battery_hash == hash) {
        gold.answers[alias] = r->answers;
      } else {
        gold.warnings.push_back("dilemma responses of " + alias +
                                " were recorded against another battery and are ignored");
      }
    }
    if (auto m = assessments::load_mbti(sessions, alias)) gold.mbti[alias] = *m;
    if (auto b = assessments::load_bfi44(sessions, alias)) gold.bigfive[alias] = b->bits;
  }
  return gold;
}

RunData load_run(const store::RunStore& runs, const std::string& run_id) {
  RunData data;
  data.manifest = runs.load_manifest(run_id);
  data.battery = runs.load_run_battery(run_id);
  for (auto c : runs.conditions(run_id)) data.sets.push_back(runs.load_run(run_id, c));
  data.personality = runs.load_personality(run_id);
  return data;
}

metrics::MetricReport evaluate(const GoldData& gold, const RunData& run,
                               const EvaluateOptions& options) {
  if (!options.allow_gaps) {
    for (const auto& s : run.sets) {
      if (s.gaps.empty()) continue;
      std::vector<std::string> cells;
      for (const auto& g : s.gaps) cells.push_back(g.participant_alias + "/" + g.item_id);
      throw Error(ErrorCode::GridMismatch,
                  std::to_string(s.gaps.size()) + " cells of condition " +
                      std::string(interview::condition_token(s.condition)) +
                      " have no prediction",
                  {{"condition", interview::condition_token(s.condition)}, {"cells", cells}});
    }
  }
  auto eval = options.evaluation;
  if (!options.allow_gaps) eval.missing = metrics::MissingPolicy::Strict;

  metrics::EvaluationInputs in;
  in.run_id = run.manifest.run_id;
  in.battery = &run.battery;
  in.gold = gold.answers;
  in.sets = run.sets;
  in.gold_mbti = gold.mbti;
  in.gold_bigfive = gold.bigfive;
  in.personality = run.personality;
  auto report = metrics::build_report(in, eval);
  report.warnings.insert(report.warnings.begin(), gold.warnings.begin(), gold.warnings.end());
  return report;
}

metrics::MetricReport evaluate_run(const store::SessionStore& sessions,
                                   const store::RunStore& runs, const std::string& run_id,
                                   const EvaluateOptions& options) {
  const auto run = load_run(runs, run_id);
  return evaluate(load_gold(sessions, run.battery), run, options);
}

simulation::PredictionSet load_prediction_file(const fs::path& path) {
  simulation::PredictionSet set;
  const auto file = read_record_file(path, "predictions");
  std::optional<Condition> condition;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rec : file.records) {
    auto r = simulation::prediction_from_json(rec);
    if (condition && *condition != r.condition) {
      throw Error(ErrorCode::InvalidRequest, path.string() + " mixes conditions");
    }
    condition = r.condition;
    if (!seen.emplace(r.participant_alias, r.item_id).second) {
      throw Error(ErrorCode::DuplicateRecord,
                  "duplicate prediction " + r.participant_alias + "/" + r.item_id);
    }
    set.records.push_back(std::move(r));
  }
  if (!condition) condition = simulation::require_condition(path.stem().string());
  set.condition = *condition;
  set.run_id = path.parent_path().filename().string();
  return set;
}

audit::AuditReport audit(const GoldData& gold, const std::vector<simulation::PredictionSet>& sets,
                         const assessments::Battery& battery, const audit::AuditOptions& options,
                         const std::vector<audit::AnnotationRecord>* annotations) {
  auto report = audit::run_audit(sets, gold.answers, battery, options);
  if (annotations) {
    for (const auto& s : sets) {
      if (s.condition != options.condition) continue;
      const auto pre = audit::prelabels_for(audit::audit_subset(s, battery));
      report.agreement = audit::agreement(*annotations, &pre);
    }
  }
  return report;
}

ReportFiles write_report(const fs::path& dir, const std::string& stem, const json& document,
                         const std::vector<metrics::MetricRow>& rows) {
  ReportFiles files{dir / (stem + ".json"), dir / (stem + ".csv")};
  write_text_file(files.json, document.dump(2) + "\n");
  write_text_file(files.csv, metrics::to_csv(rows));
  return files;
}

}  // namespace persona_lab::pipeline
