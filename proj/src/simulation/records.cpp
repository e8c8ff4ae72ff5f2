#include "persona_lab/simulation/records.hpp"

#include "persona_lab/common/error.hpp"

namespace persona_lab::simulation {

using nlohmann::json;

std::string_view location_name(EvidenceLocation l) noexcept {
  switch (l) {
    case EvidenceLocation::CoreInterview: return "CoreInterview";
    case EvidenceLocation::FollowUp: return "FollowUp";
    case EvidenceLocation::Both: return "Both";
    case EvidenceLocation::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

std::optional<EvidenceLocation> location_from_name(std::string_view s) noexcept {
  for (auto l : kLocations) {
    if (location_name(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view category_name(ReasoningCategory c) noexcept {
  switch (c) {
    case ReasoningCategory::NarrativeReference: return "NarrativeReference";
    case ReasoningCategory::ValueAbstraction: return "ValueAbstraction";
    case ReasoningCategory::CopingConstraint: return "CopingConstraint";
    case ReasoningCategory::GenericNorm: return "GenericNorm";
  }
  return "GenericNorm";
}

std::optional<ReasoningCategory> category_from_name(std::string_view s) noexcept {
  for (auto c : kCategories) {
    if (category_name(c) == s) return c;
  }
  return std::nullopt;
}

bool involves_followup(EvidenceLocation l) noexcept {
  return l == EvidenceLocation::FollowUp || l == EvidenceLocation::Both;
}

const PredictionRecord* PredictionSet::find(std::string_view alias, std::string_view item_id) const {
  for (const auto& r : records) {
    if (r.participant_alias == alias && r.item_id == item_id) return &r;
  }
  return nullptr;
}

Condition require_condition(std::string_view token) {
  auto c = interview::condition_from_token(token);
  if (!c) {
    throw Error(ErrorCode::InvalidRequest,
                "unknown condition '" + std::string(token) + "' (core10, full, summary)");
  }
  return *c;
}

namespace {

EvidenceLocation require_location(const json& j) {
  auto l = location_from_name(j.get<std::string>());
  if (!l) throw Error(ErrorCode::CorruptLog, "unknown evidence location " + j.dump());
  return *l;
}

}  // namespace

json to_json(const ReasoningTrace& t) {
  return {{"explanation", t.explanation},
          {"evidence_excerpt", t.evidence_excerpt},
          {"claimed_location", location_name(t.claimed_location)},
          {"verified_location", location_name(t.verified_location)},
          {"reasoning_category", category_name(t.reasoning_category)},
          {"location_mismatch", t.location_mismatch}};
}

ReasoningTrace trace_from_json(const json& j) {
  ReasoningTrace t;
  t.explanation = j.at("explanation").get<std::string>();
  t.evidence_excerpt = j.at("evidence_excerpt").get<std::string>();
  t.claimed_location = require_location(j.at("claimed_location"));
  t.verified_location = require_location(j.at("verified_location"));
  auto c = category_from_name(j.at("reasoning_category").get<std::string>());
  if (!c) throw Error(ErrorCode::CorruptLog, "unknown reasoning category");
  t.reasoning_category = *c;
  t.location_mismatch = j.at("location_mismatch").get<bool>();
  return t;
}

json to_json(const PredictionRecord& r) {
  return {{"participant_alias", r.participant_alias},
          {"item_id", r.item_id},
          {"condition", interview::condition_token(r.condition)},
          {"answer", assessments::to_json(r.answer)},
          {"trace", to_json(r.trace)},
          {"prompt_fingerprint", r.prompt_fingerprint},
          {"created_at", r.created_at}};
}

PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord r;
  r.participant_alias = j.at("participant_alias").get<std::string>();
  r.item_id = j.at("item_id").get<std::string>();
  r.condition = require_condition(j.at("condition").get<std::string>());
  r.answer = assessments::answer_from_json(j.at("answer"));
  r.trace = trace_from_json(j.at("trace"));
  r.prompt_fingerprint = j.at("prompt_fingerprint").get<std::string>();
  r.created_at = j.value("created_at", "");
  return r;
}

json to_json(const GapRecord& g) {
  return {{"participant_alias", g.participant_alias},
          {"item_id", g.item_id},
          {"condition", interview::condition_token(g.condition)},
          {"error", g.error},
          {"message", g.message}};
}

GapRecord gap_from_json(const json& j) {
  return {j.at("participant_alias").get<std::string>(), j.at("item_id").get<std::string>(),
          require_condition(j.at("condition").get<std::string>()), j.value("error", ""),
          j.value("message", "")};
}

json to_json(const RunManifest& m) {
  return {{"run_id", m.run_id},       {"config", m.config},
          {"battery_hash", m.battery_hash}, {"backend_name", m.backend_name},
          {"seed", m.seed},           {"created_at", m.created_at}};
}

RunManifest manifest_from_json(const json& j) {
  return {j.at("run_id").get<std::string>(), j.at("config"),
          j.at("battery_hash").get<std::string>(), j.at("backend_name").get<std::string>(),
          j.at("seed").get<std::uint64_t>(), j.value("created_at", "")};
}

json to_json(const PersonalityPrediction& p) {
  return {{"participant_alias", p.participant_alias},
          {"condition", interview::condition_token(p.condition)},
          {"mbti_top2", {p.mbti_top2[0], p.mbti_top2[1]}},
          {"bigfive", assessments::to_json(p.bigfive)},
          {"explanation", p.explanation},
          {"prompt_fingerprint", p.prompt_fingerprint},
          {"created_at", p.created_at}};
}

PersonalityPrediction personality_from_json(const json& j) {
  PersonalityPrediction p;
  p.participant_alias = j.at("participant_alias").get<std::string>();
  p.condition = require_condition(j.at("condition").get<std::string>());
  p.mbti_top2 = {j.at("mbti_top2").at(0).get<std::string>(),
                 j.at("mbti_top2").at(1).get<std::string>()};
  p.bigfive = assessments::scores_from_json(j.at("bigfive"));
  p.explanation = j.value("explanation", "");
  p.prompt_fingerprint = j.value("prompt_fingerprint", "");
  p.created_at = j.value("created_at", "");
  return p;
}

}  // namespace persona_lab::simulation
