#include "persona_lab/interview/session.hpp"

#include <algorithm>

#include "persona_lab/common/error.hpp"

namespace persona_lab::interview {

using nlohmann::json;

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::Created: return "Created";
    case Stage::CoreAsked: return "CoreAsked";
    case Stage::CoreAnswered: return "CoreAnswered";
    case Stage::FollowUpsAsked: return "FollowUpsAsked";
    case Stage::FollowUpsAnswered: return "FollowUpsAnswered";
    case Stage::Summarized: return "Summarized";
    case Stage::Closed: return "Closed";
  }
  return "Created";
}

Stage stage_from_name(std::string_view name) {
  for (Stage s : {Stage::Created, Stage::CoreAsked, Stage::CoreAnswered, Stage::FollowUpsAsked,
                  Stage::FollowUpsAnswered, Stage::Summarized, Stage::Closed}) {
    if (stage_name(s) == name) return s;
  }
  throw Error(ErrorCode::CorruptLog, "unknown stage '" + std::string(name) + "'");
}

std::string_view question_stage_name(QuestionStage s) noexcept {
  return s == QuestionStage::Core ? "Core" : "FollowUp";
}

std::string_view condition_token(Condition c) noexcept {
  switch (c) {
    case Condition::Core10: return "core10";
    case Condition::FullInterview: return "full";
    case Condition::PersonalitySummary: return "summary";
  }
  return "core10";
}

std::optional<Condition> condition_from_token(std::string_view token) noexcept {
  for (Condition c : {Condition::Core10, Condition::FullInterview, Condition::PersonalitySummary}) {
    if (condition_token(c) == token) return c;
  }
  return std::nullopt;
}

std::string_view condition_display_name(Condition c) noexcept {
  switch (c) {
    case Condition::Core10: return "Core-10";
    case Condition::FullInterview: return "Full Interview";
    case Condition::PersonalitySummary: return "Personality Summary";
  }
  return "";
}

const Question* SessionState::find_question(std::string_view question_id) const {
  for (const auto* list : {&core_questions, &followup_questions}) {
    for (const auto& q : *list) {
      if (q.question_id == question_id) return &q;
    }
  }
  return nullptr;
}

const AnswerTurn* SessionState::find_answer(std::string_view question_id) const {
  for (const auto& a : answers) {
    if (a.question_id == question_id) return &a;
  }
  return nullptr;
}

std::size_t SessionState::answered_count(QuestionStage s) const {
  const auto& list = s == QuestionStage::Core ? core_questions : followup_questions;
  return static_cast<std::size_t>(std::count_if(
      list.begin(), list.end(), [&](const Question& q) { return find_answer(q.question_id); }));
}

std::vector<Question> SessionState::pending_questions() const {
  const std::vector<Question>* list = nullptr;
  if (stage == Stage::CoreAsked) list = &core_questions;
  if (stage == Stage::FollowUpsAsked) list = &followup_questions;
  std::vector<Question> out;
  if (!list) return out;
  for (const auto& q : *list) {
    if (!find_answer(q.question_id)) out.push_back(q);
  }
  return out;
}

Stage required_stage(Condition condition) noexcept {
  switch (condition) {
    case Condition::Core10: return Stage::CoreAnswered;
    case Condition::FullInterview: return Stage::FollowUpsAnswered;
    case Condition::PersonalitySummary: return Stage::Summarized;
  }
  return Stage::Summarized;
}

ContextBundle slice_context(const SessionState& session, Condition condition) {
  const Stage need = required_stage(condition);
  if (session.stage < need) {
    throw Error(ErrorCode::StageTooEarly,
                std::string(condition_display_name(condition)) + " context needs stage " +
                    std::string(stage_name(need)) + ", session " + session.participant_alias +
                    " is at " + std::string(stage_name(session.stage)),
                {{"alias", session.participant_alias}, {"stage", stage_name(session.stage)}});
  }
  ContextBundle bundle;
  bundle.condition = condition;
  if (condition == Condition::PersonalitySummary) {
    bundle.summary_text = session.summary ? session.summary->full_text : std::string();
    return bundle;
  }
  std::vector<AnswerTurn> ordered = session.answers;
  std::sort(ordered.begin(), ordered.end(),
            [](const AnswerTurn& a, const AnswerTurn& b) { return a.seq < b.seq; });
  for (const auto& a : ordered) {
    const Question* q = session.find_question(a.question_id);
    if (!q) continue;
    if (condition == Condition::Core10 && q->stage != QuestionStage::Core) continue;
    bundle.turns.push_back({q->question_id, q->stage, q->text, a.text, a.seq});
  }
  return bundle;
}

json to_json(const Question& q) {
  json j = {{"question_id", q.question_id},
            {"stage", question_stage_name(q.stage)},
            {"text", q.text}};
  if (q.domain_id) j["domain_id"] = *q.domain_id;
  if (q.stage == QuestionStage::FollowUp) j["referenced_answer_ids"] = q.referenced_answer_ids;
  return j;
}

Question question_from_json(const json& j) {
  Question q;
  q.question_id = j.at("question_id").get<std::string>();
  const auto stage = j.at("stage").get<std::string>();
  if (stage == "Core") q.stage = QuestionStage::Core;
  else if (stage == "FollowUp") q.stage = QuestionStage::FollowUp;
  else throw Error(ErrorCode::CorruptLog, "unknown question stage '" + stage + "'");
  if (j.contains("domain_id")) q.domain_id = j.at("domain_id").get<int>();
  q.text = j.at("text").get<std::string>();
  if (j.contains("referenced_answer_ids")) {
    q.referenced_answer_ids = j.at("referenced_answer_ids").get<std::vector<std::string>>();
  }
  return q;
}

json to_json(const AnswerTurn& a) {
  return {{"question_id", a.question_id}, {"text", a.text}, {"seq", a.seq},
          {"recorded_at", a.recorded_at}};
}

AnswerTurn answer_from_json(const json& j) {
  return {j.at("question_id").get<std::string>(), j.at("text").get<std::string>(),
          j.at("seq").get<std::int64_t>(), j.value("recorded_at", "")};
}

json to_json(const PersonaSummary& s) {
  json insights = json::object();
  for (const auto& [id, text] : s.per_domain_insights) insights[std::to_string(id)] = text;
  return {{"full_text", s.full_text}, {"per_domain_insights", std::move(insights)}};
}

PersonaSummary summary_from_json(const json& j) {
  PersonaSummary s;
  s.full_text = j.at("full_text").get<std::string>();
  for (const auto& [k, v] : j.at("per_domain_insights").items()) {
    s.per_domain_insights[std::stoi(k)] = v.get<std::string>();
  }
  return s;
}

}  // namespace persona_lab::interview
