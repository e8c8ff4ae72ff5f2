#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace persona_lab::interview {

enum class Stage {
  Created,
  CoreAsked,
  CoreAnswered,
  FollowUpsAsked,
  FollowUpsAnswered,
  Summarized,
  Closed,
};

std::string_view stage_name(Stage s) noexcept;
Stage stage_from_name(std::string_view name);

enum class QuestionStage { Core, FollowUp };

std::string_view question_stage_name(QuestionStage s) noexcept;

// Which slice of the interview conditions a downstream prediction.
enum class Condition { Core10, FullInterview, PersonalitySummary };

inline constexpr std::array<Condition, 3> kConditions = {
    Condition::Core10, Condition::FullInterview, Condition::PersonalitySummary};

// "core10" / "full" / "summary".
std::string_view condition_token(Condition c) noexcept;
std::optional<Condition> condition_from_token(std::string_view token) noexcept;
std::string_view condition_display_name(Condition c) noexcept;

inline constexpr std::size_t kCoreQuestionCount = 10;

struct Question {
  std::string question_id;
  QuestionStage stage = QuestionStage::Core;
  std::optional<int> domain_id;  // Core only
  std::string text;
  std::vector<std::string> referenced_answer_ids;  // FollowUp only

  bool operator==(const Question&) const = default;
};

struct AnswerTurn {
  std::string question_id;
  std::string text;
  std::int64_t seq = 0;
  std::string recorded_at;

  bool operator==(const AnswerTurn&) const = default;
};

struct PersonaSummary {
  std::map<int, std::string> per_domain_insights;
  std::string full_text;

  bool operator==(const PersonaSummary&) const = default;
};

struct SessionState {
  std::string session_id;
  std::string participant_alias;
  Stage stage = Stage::Created;
  std::vector<Question> core_questions;
  std::vector<Question> followup_questions;
  std::vector<AnswerTurn> answers;
  std::optional<PersonaSummary> summary;
  nlohmann::json config_snapshot;
  std::int64_t last_seq = 0;

  const Question* find_question(std::string_view question_id) const;
  const AnswerTurn* find_answer(std::string_view question_id) const;
  std::size_t answered_count(QuestionStage stage) const;
  // Unanswered questions of the current asking stage, in question order.
  std::vector<Question> pending_questions() const;

  bool operator==(const SessionState&) const = default;
};

struct ContextTurn {
  std::string question_id;
  QuestionStage stage = QuestionStage::Core;
  std::string question;
  std::string answer;
  std::int64_t seq = 0;

  bool operator==(const ContextTurn&) const = default;
};

struct ContextBundle {
  Condition condition = Condition::Core10;
  std::vector<ContextTurn> turns;           // empty for PersonalitySummary
  std::optional<std::string> summary_text;  // present iff PersonalitySummary

  bool operator==(const ContextBundle&) const = default;
};

// Pure and deterministic. Throws Error(StageTooEarly).
ContextBundle slice_context(const SessionState& session, Condition condition);

// Minimum stage a condition needs.
Stage required_stage(Condition condition) noexcept;

nlohmann::json to_json(const Question& q);
Question question_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnswerTurn& a);
AnswerTurn answer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PersonaSummary& s);
PersonaSummary summary_from_json(const nlohmann::json& j);

}  // namespace persona_lab::interview
