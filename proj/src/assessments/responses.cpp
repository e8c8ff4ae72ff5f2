#include "persona_lab/assessments/responses.hpp"

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::assessments {

namespace {

constexpr const char* kDilemma = "dilemma";
constexpr const char* kBfi = "bfi44";
constexpr const char* kMbti = "mbti";

json answers_json(const ItemAnswers& answers) {
  json j = json::object();
  for (const auto& [id, a] : answers) j[id] = to_json(a);
  return j;
}

}  // namespace

DilemmaResponseSet record_responses(const store::SessionStore& store, const std::string& alias,
                                    const Battery& battery, const ItemAnswers& answers,
                                    bool finalize, const std::string& at) {
  for (const auto& [id, a] : answers) {
    const auto* item = battery.find(id);
    if (!item) {
      throw Error(ErrorCode::InvalidAnswer, id + " is not in the battery",
                  {{"item", id}, {"reason", "unknown item"}});
    }
    if (auto why = answer_problem(*item, a)) {
      throw Error(ErrorCode::InvalidAnswer, id + ": " + *why, {{"item", id}, {"reason", *why}});
    }
  }
  auto lock = store.lock(alias);
  DilemmaResponseSet set;
  set.participant_alias = alias;
  set.battery_hash = battery_hash(battery);
  if (auto existing = load_responses(store, alias)) {
    if (existing->battery_hash == set.battery_hash) set.answers = existing->answers;
  }
  for (const auto& [id, a] : answers) set.answers[id] = a;
  std::vector<std::string> missing;
  for (const auto& item : battery.items) {
    if (!set.answers.count(item.item_id)) missing.push_back(item.item_id);
  }
  set.complete = missing.empty();
  if (finalize && !set.complete) {
    throw Error(ErrorCode::IncompleteSet,
                std::to_string(missing.size()) + " items unanswered for " + alias,
                {{"missing", missing}});
  }
  store.record_assessment(lock, kDilemma,
                          {{"participant_alias", alias},
                           {"battery_hash", set.battery_hash},
                           {"answers", answers_json(set.answers)},
                           {"complete", set.complete}},
                          at);
  return set;
}

std::optional<DilemmaResponseSet> load_responses(const store::SessionStore& store,
                                                 const std::string& alias) {
  auto doc = store.load_assessment(alias, kDilemma);
  if (!doc) return std::nullopt;
  DilemmaResponseSet set;
  set.participant_alias = alias;
  set.battery_hash = doc->at("battery_hash").get<std::string>();
  for (const auto& [id, a] : doc->at("answers").items()) set.answers[id] = answer_from_json(a);
  set.complete = doc->value("complete", false);
  return set;
}

BfiRecord record_bfi44(const store::SessionStore& store, const std::string& alias,
                       const Bfi44Response& response, const Bfi44Key& key, const std::string& at) {
  BfiRecord rec{response, score_bfi44(response, key), {}};
  rec.bits = binarize_bigfive(rec.scores);
  auto lock = store.lock(alias);
  store.record_assessment(lock, kBfi,
                          {{"responses", response.items},
                           {"scores", to_json(rec.scores)},
                           {"bits", to_json(rec.bits)}},
                          at);
  return rec;
}

std::optional<BfiRecord> load_bfi44(const store::SessionStore& store, const std::string& alias) {
  auto doc = store.load_assessment(alias, kBfi);
  if (!doc) return std::nullopt;
  BfiRecord rec;
  rec.response.items = doc->at("responses").get<std::vector<int>>();
  rec.scores = scores_from_json(doc->at("scores"));
  rec.bits = bits_from_json(doc->at("bits"));
  return rec;
}

void record_mbti(const store::SessionStore& store, const std::string& alias,
                 const MbtiReport& report, const std::string& at) {
  if (report.types.empty() || report.types.size() > 2) {
    throw Error(ErrorCode::InvalidMbti, "an MBTI report holds one or two types");
  }
  for (const auto& t : report.types) normalize_mbti(t);
  auto lock = store.lock(alias);
  store.record_assessment(lock, kMbti, {{"types", report.types}}, at);
}

std::optional<MbtiReport> load_mbti(const store::SessionStore& store, const std::string& alias) {
  auto doc = store.load_assessment(alias, kMbti);
  if (!doc) return std::nullopt;
  return MbtiReport{doc->at("types").get<std::vector<std::string>>()};
}

std::map<std::string, ItemAnswers> read_responses_file(const std::filesystem::path& path,
                                                       const Battery& battery) {
  auto file = read_record_file(path, "responses", ErrorCode::InvalidAnswer);
  std::map<std::string, ItemAnswers> out;
  for (const auto& r : file.records) {
    const auto alias = r.at("alias").get<std::string>();
    const auto item_id = r.at("item_id").get<std::string>();
    const auto& item = battery.at(item_id);
    const auto& raw = r.at("answer");
    Answer a = raw.is_string() ? parse_answer_text(item, raw.get<std::string>())
                               : answer_from_json(raw);
    out[alias][item_id] = std::move(a);
  }
  return out;
}

}  // namespace persona_lab::assessments
