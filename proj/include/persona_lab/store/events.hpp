#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "persona_lab/interview/session.hpp"

namespace persona_lab::store {

enum class EventKind {
  SessionCreated,
  QuestionAsked,
  AnswerSubmitted,
  FollowUpsGenerated,
  SummaryGenerated,
  AssessmentRecorded,
  SessionClosed,
};

std::string_view event_kind_name(EventKind k) noexcept;
std::optional<EventKind> event_kind_from_name(std::string_view name) noexcept;

struct EventRecord {
  std::string session_id;
  std::int64_t seq = 0;
  EventKind kind = EventKind::SessionCreated;
  nlohmann::json payload = nlohmann::json::object();
  std::string at;

  bool operator==(const EventRecord&) const = default;
};

nlohmann::json to_json(const EventRecord& e);
// Throws Error(CorruptLog) on a structurally invalid record.
EventRecord event_from_json(const nlohmann::json& j);

// Payload builders, so the engine and tests agree on the shapes.
EventRecord session_created(const std::string& session_id, const std::string& alias,
                            const nlohmann::json& config_snapshot, const std::string& at);
EventRecord questions_asked(const interview::SessionState& s,
                            const std::vector<interview::Question>& questions,
                            const std::string& prompt_fingerprint, const std::string& at);
EventRecord answer_submitted(const interview::SessionState& s, const std::string& question_id,
                             const std::string& text, const std::string& at);
EventRecord followups_generated(const interview::SessionState& s,
                                const std::vector<interview::Question>& questions,
                                const std::string& prompt_fingerprint, const std::string& at);
EventRecord summary_generated(const interview::SessionState& s,
                              const interview::PersonaSummary& summary,
                              const std::string& prompt_fingerprint, const std::string& at);
EventRecord assessment_recorded(const interview::SessionState& s, const std::string& assessment,
                                const std::string& sha256, const std::string& at);
EventRecord session_closed(const interview::SessionState& s, const std::string& at);

// Applies one event to the state. Throws Error(CorruptLog) when the event does
// not fit the state (seq gap, stage order violated, unknown question, ...).
void apply_event(interview::SessionState& state, const EventRecord& event);

// Pure fold over a whole log.
interview::SessionState fold(const std::vector<EventRecord>& events);

}  // namespace persona_lab::store
