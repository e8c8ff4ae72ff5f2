#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/interview/session.hpp"

namespace persona_lab::simulation {

using interview::Condition;

enum class EvidenceLocation { CoreInterview, FollowUp, Both, Unclassified };
enum class ReasoningCategory { NarrativeReference, ValueAbstraction, CopingConstraint, GenericNorm };

inline constexpr std::array<EvidenceLocation, 4> kLocations = {
    EvidenceLocation::CoreInterview, EvidenceLocation::FollowUp, EvidenceLocation::Both,
    EvidenceLocation::Unclassified};
inline constexpr std::array<ReasoningCategory, 4> kCategories = {
    ReasoningCategory::NarrativeReference, ReasoningCategory::ValueAbstraction,
    ReasoningCategory::CopingConstraint, ReasoningCategory::GenericNorm};

std::string_view location_name(EvidenceLocation l) noexcept;
std::optional<EvidenceLocation> location_from_name(std::string_view s) noexcept;
std::string_view category_name(ReasoningCategory c) noexcept;
std::optional<ReasoningCategory> category_from_name(std::string_view s) noexcept;

// True when the location includes follow-up material (FollowUp or Both).
bool involves_followup(EvidenceLocation l) noexcept;

struct ReasoningTrace {
  std::string explanation;
  std::string evidence_excerpt;
  EvidenceLocation claimed_location = EvidenceLocation::Unclassified;
  EvidenceLocation verified_location = EvidenceLocation::Unclassified;
  ReasoningCategory reasoning_category = ReasoningCategory::GenericNorm;
  bool location_mismatch = false;

  bool operator==(const ReasoningTrace&) const = default;
};

struct PredictionRecord {
  std::string participant_alias;
  std::string item_id;
  Condition condition = Condition::Core10;
  assessments::Answer answer;
  ReasoningTrace trace;
  std::string prompt_fingerprint;
  std::string created_at;

  bool operator==(const PredictionRecord&) const = default;
};

// A grid cell that could not be predicted.
struct GapRecord {
  std::string participant_alias;
  std::string item_id;
  Condition condition = Condition::Core10;
  std::string error;  // error token
  std::string message;

  bool operator==(const GapRecord&) const = default;
};

struct RunManifest {
  std::string run_id;
  nlohmann::json config = nlohmann::json::object();
  std::string battery_hash;
  std::string backend_name;
  std::uint64_t seed = 0;
  std::string created_at;

  bool operator==(const RunManifest&) const = default;
};

struct PredictionSet {
  std::string run_id;
  Condition condition = Condition::Core10;
  std::vector<PredictionRecord> records;
  std::vector<GapRecord> gaps;
  RunManifest manifest;

  const PredictionRecord* find(std::string_view alias, std::string_view item_id) const;
};

// Personality inference for one participant under one condition.
struct PersonalityPrediction {
  std::string participant_alias;
  Condition condition = Condition::Core10;
  std::array<std::string, 2> mbti_top2;
  assessments::BigFiveScores bigfive;
  std::string explanation;
  std::string prompt_fingerprint;
  std::string created_at;

  bool operator==(const PersonalityPrediction&) const = default;
};

nlohmann::json to_json(const ReasoningTrace& t);
ReasoningTrace trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GapRecord& g);
GapRecord gap_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PersonalityPrediction& p);
PersonalityPrediction personality_from_json(const nlohmann::json& j);

Condition require_condition(std::string_view token);

}  // namespace persona_lab::simulation
