#include "persona_lab/store/run_store.hpp"

#include <algorithm>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestKind = "run-manifest";
constexpr std::string_view kPredsKind = "predictions";
constexpr std::string_view kGapsKind = "prediction-gaps";
constexpr std::string_view kPersonalityKind = "personality-predictions";
constexpr const char* kPersonalityFile = "personality.preds";
constexpr const char* kPersonalityGapsFile = "personality.gaps";

bool valid_run_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  }) && id.front() != '.';
}

}  // namespace

RunStore::RunStore(fs::path root, bool durable) : root_(std::move(root)), durable_(durable) {}

fs::path RunStore::run_dir(const std::string& run_id) const {
  if (!valid_run_id(run_id)) {
    throw Error(ErrorCode::InvalidRequest, "invalid run id '" + run_id + "'");
  }
  return root_ / "runs" / run_id;
}

bool RunStore::has_run(const std::string& run_id) const {
  return valid_run_id(run_id) && fs::exists(run_dir(run_id) / "manifest.json");
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> ids;
  const fs::path dir = root_ / "runs";
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && has_run(name)) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string RunStore::preds_name(Condition c) {
  return std::string(interview::condition_token(c)) + ".preds";
}

std::string RunStore::gaps_name(Condition c) {
  return std::string(interview::condition_token(c)) + ".gaps";
}

void RunStore::require_manifest(const std::string& run_id) const {
  if (!fs::exists(run_dir(run_id) / "manifest.json")) {
    throw Error(ErrorCode::ManifestMissing, "run '" + run_id + "' has no manifest",
                {{"run_id", run_id}});
  }
}

RunManifest RunStore::open_run(const RunManifest& manifest, const assessments::Battery& battery) {
  const fs::path dir = run_dir(manifest.run_id);
  const std::string hash = assessments::battery_hash(battery);
  if (!manifest.battery_hash.empty() && manifest.battery_hash != hash) {
    throw Error(ErrorCode::HashMismatch, "manifest battery hash does not match the battery");
  }
  if (has_run(manifest.run_id)) {
    RunManifest existing = load_manifest(manifest.run_id);
    if (existing.battery_hash != hash) {
      throw Error(ErrorCode::HashMismatch,
                  "run '" + manifest.run_id + "' was produced against a different battery",
                  {{"expected", existing.battery_hash}, {"actual", hash}});
    }
    load_run_battery(manifest.run_id);
    return existing;
  }
  RunManifest m = manifest;
  m.battery_hash = hash;
  fs::create_directories(dir);
  assessments::save_battery(dir / "battery.jsonl", battery);
  write_record_file(dir / "manifest.json", kManifestKind, {simulation::to_json(m)});
  return m;
}

RunManifest RunStore::load_manifest(const std::string& run_id) const {
  require_manifest(run_id);
  auto file = read_record_file(run_dir(run_id) / "manifest.json", kManifestKind);
  if (file.records.size() != 1) {
    throw Error(ErrorCode::CorruptLog, "manifest must hold exactly one document");
  }
  return simulation::manifest_from_json(file.records.front());
}

assessments::Battery RunStore::load_run_battery(const std::string& run_id) const {
  RunManifest m = load_manifest(run_id);
  const fs::path path = run_dir(run_id) / "battery.jsonl";
  if (!fs::exists(path)) {
    throw Error(ErrorCode::HashMismatch, "battery copy missing for run '" + run_id + "'");
  }
  const std::string actual = sha256_hex(read_text_file(path));
  if (actual != m.battery_hash) {
    throw Error(ErrorCode::HashMismatch, "battery file for run '" + run_id + "' was modified",
                {{"expected", m.battery_hash}, {"actual", actual}});
  }
  return assessments::load_battery(path);
}

std::set<RunStore::Key>& RunStore::index_for(const std::string& run_id) {
  auto it = index_.find(run_id);
  if (it != index_.end()) return it->second;
  std::set<Key> keys;
  for (auto c : interview::kConditions) {
    const fs::path path = run_dir(run_id) / preds_name(c);
    if (!fs::exists(path)) continue;
    for (const auto& rec : read_record_file(path, kPredsKind).records) {
      keys.emplace(rec.at("participant_alias").get<std::string>(),
                   rec.at("item_id").get<std::string>(), rec.at("condition").get<std::string>());
    }
  }
  const fs::path ppath = run_dir(run_id) / kPersonalityFile;
  if (fs::exists(ppath)) {
    for (const auto& rec : read_record_file(ppath, kPersonalityKind).records) {
      keys.emplace(rec.at("participant_alias").get<std::string>(), "",
                   rec.at("condition").get<std::string>());
    }
  }
  return index_.emplace(run_id, std::move(keys)).first->second;
}

void RunStore::store_prediction(const std::string& run_id, const PredictionRecord& record) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  auto& keys = index_for(run_id);
  Key key{record.participant_alias, record.item_id,
          std::string(interview::condition_token(record.condition))};
  if (keys.count(key)) {
    throw Error(ErrorCode::DuplicateRecord,
                "run '" + run_id + "' already has a prediction for " + record.participant_alias +
                    "/" + record.item_id + "/" + std::get<2>(key),
                {{"participant_alias", record.participant_alias}, {"item_id", record.item_id}});
  }
  append_record(run_dir(run_id) / preds_name(record.condition), kPredsKind,
                simulation::to_json(record), durable_);
  keys.insert(std::move(key));
}

void RunStore::store_predictions(const std::string& run_id,
                                 const std::vector<PredictionRecord>& records) {
  for (const auto& r : records) store_prediction(run_id, r);
}

void RunStore::store_gap(const std::string& run_id, const GapRecord& gap) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  append_record(run_dir(run_id) / gaps_name(gap.condition), kGapsKind, simulation::to_json(gap),
                durable_);
}

bool RunStore::has_prediction(const std::string& run_id, const std::string& alias,
                              const std::string& item_id, Condition condition) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  return index_for(run_id).count(
             {alias, item_id, std::string(interview::condition_token(condition))}) > 0;
}

PredictionSet RunStore::load_run(const std::string& run_id, Condition condition) const {
  PredictionSet set;
  set.run_id = run_id;
  set.condition = condition;
  set.manifest = load_manifest(run_id);
  load_run_battery(run_id);
  const fs::path dir = run_dir(run_id);
  std::set<std::pair<std::string, std::string>> seen;
  if (fs::exists(dir / preds_name(condition))) {
    for (const auto& rec : read_record_file(dir / preds_name(condition), kPredsKind).records) {
      auto r = simulation::prediction_from_json(rec);
      if (!seen.emplace(r.participant_alias, r.item_id).second) {
        throw Error(ErrorCode::DuplicateRecord,
                    "duplicate prediction " + r.participant_alias + "/" + r.item_id);
      }
      set.records.push_back(std::move(r));
    }
  }
  if (fs::exists(dir / gaps_name(condition))) {
    std::map<std::pair<std::string, std::string>, GapRecord> latest;
    for (const auto& rec : read_record_file(dir / gaps_name(condition), kGapsKind).records) {
      auto g = simulation::gap_from_json(rec);
      std::pair<std::string, std::string> key{g.participant_alias, g.item_id};
      if (!seen.count(key)) latest[key] = std::move(g);
    }
    for (auto& [k, g] : latest) set.gaps.push_back(std::move(g));
  }
  return set;
}

std::vector<Condition> RunStore::conditions(const std::string& run_id) const {
  require_manifest(run_id);
  std::vector<Condition> out;
  for (auto c : interview::kConditions) {
    if (fs::exists(run_dir(run_id) / preds_name(c)) || fs::exists(run_dir(run_id) / gaps_name(c)))
      out.push_back(c);
  }
  return out;
}

void RunStore::store_personality(const std::string& run_id, const PersonalityPrediction& p) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  auto& keys = index_for(run_id);
  Key key{p.participant_alias, "", std::string(interview::condition_token(p.condition))};
  if (keys.count(key)) {
    throw Error(ErrorCode::DuplicateRecord, "run '" + run_id +
                                                "' already has a personality prediction for " +
                                                p.participant_alias);
  }
  append_record(run_dir(run_id) / kPersonalityFile, kPersonalityKind, simulation::to_json(p),
                durable_);
  keys.insert(std::move(key));
}

std::vector<PersonalityPrediction> RunStore::load_personality(const std::string& run_id) const {
  require_manifest(run_id);
  std::vector<PersonalityPrediction> out;
  const fs::path path = run_dir(run_id) / kPersonalityFile;
  if (!fs::exists(path)) return out;
  for (const auto& rec : read_record_file(path, kPersonalityKind).records) {
    out.push_back(simulation::personality_from_json(rec));
  }
  return out;
}

bool RunStore::has_personality(const std::string& run_id, const std::string& alias,
                               Condition condition) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  return index_for(run_id).count({alias, "", std::string(interview::condition_token(condition))}) >
         0;
}

void RunStore::store_personality_gap(const std::string& run_id, const GapRecord& gap) {
  require_manifest(run_id);
  std::lock_guard<std::mutex> guard(mu_);
  append_record(run_dir(run_id) / kPersonalityGapsFile, kGapsKind, simulation::to_json(gap),
                durable_);
}

std::vector<GapRecord> RunStore::load_personality_gaps(const std::string& run_id) const {
  require_manifest(run_id);
  const fs::path path = run_dir(run_id) / kPersonalityGapsFile;
  if (!fs::exists(path)) return {};
  std::set<std::pair<std::string, Condition>> done;
  for (const auto& p : load_personality(run_id)) done.emplace(p.participant_alias, p.condition);
  std::map<std::pair<std::string, Condition>, GapRecord> latest;
  for (const auto& rec : read_record_file(path, kGapsKind).records) {
    auto g = simulation::gap_from_json(rec);
    std::pair<std::string, Condition> key{g.participant_alias, g.condition};
    if (!done.count(key)) latest[key] = std::move(g);
  }
  std::vector<GapRecord> out;
  for (auto& [k, g] : latest) out.push_back(std::move(g));
  return out;
}

}  // namespace persona_lab::store
