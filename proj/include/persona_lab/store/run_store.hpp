#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/simulation/records.hpp"

namespace persona_lab::store {

using simulation::Condition;
using simulation::GapRecord;
using simulation::PersonalityPrediction;
using simulation::PredictionRecord;
using simulation::PredictionSet;
using simulation::RunManifest;

// Layout under <root>/runs/<run_id>/:
//   manifest.json        header + one canonical manifest line
//   battery.jsonl        the battery the run was produced against
//   <condition>.preds    one PredictionRecord per line
//   <condition>.gaps     cells that failed (superseded by later records)
//   personality.preds    MBTI / Big Five predictions
//   personality.gaps     failed personality predictions
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root, bool durable = false);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;
  bool has_run(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  // Writes battery copy and manifest. Reopening an existing run requires the
  // same battery hash (HashMismatch otherwise) and returns the stored manifest.
  RunManifest open_run(const RunManifest& manifest, const assessments::Battery& battery);

  RunManifest load_manifest(const std::string& run_id) const;  // ManifestMissing
  // Re-hashes battery.jsonl against the manifest; HashMismatch on edits.
  assessments::Battery load_run_battery(const std::string& run_id) const;

  // Rejects a second record for the same (participant, item, condition) with
  // DuplicateRecord.
  void store_prediction(const std::string& run_id, const PredictionRecord& record);
  void store_predictions(const std::string& run_id, const std::vector<PredictionRecord>& records);
  void store_gap(const std::string& run_id, const GapRecord& gap);

  PredictionSet load_run(const std::string& run_id, Condition condition) const;
  std::vector<Condition> conditions(const std::string& run_id) const;
  bool has_prediction(const std::string& run_id, const std::string& alias,
                      const std::string& item_id, Condition condition);

  void store_personality(const std::string& run_id, const PersonalityPrediction& p);
  std::vector<PersonalityPrediction> load_personality(const std::string& run_id) const;
  bool has_personality(const std::string& run_id, const std::string& alias, Condition condition);
  // Gap item_id is "personality"; superseded once a prediction is stored.
  void store_personality_gap(const std::string& run_id, const GapRecord& gap);
  std::vector<GapRecord> load_personality_gaps(const std::string& run_id) const;

  static std::string preds_name(Condition c);
  static std::string gaps_name(Condition c);

 private:
  using Key = std::tuple<std::string, std::string, std::string>;  // alias, item, condition
  void require_manifest(const std::string& run_id) const;
  std::set<Key>& index_for(const std::string& run_id);

  std::filesystem::path root_;
  bool durable_;
  std::mutex mu_;
  std::map<std::string, std::set<Key>> index_;
};

}  // namespace persona_lab::store
