#pragma once

#include <string>

#include "persona_lab/common/clock.hpp"
#include "persona_lab/gateway/backend.hpp"
#include "persona_lab/interview/config.hpp"
#include "persona_lab/interview/session.hpp"
#include "persona_lab/store/session_store.hpp"

namespace persona_lab::interview {

// Three-stage interview state machine over the event store. Every mutating
// call takes the session's writer lock, checks that `session` is the latest
// persisted state (SeqConflict otherwise), appends one event and returns the
// new state.
class InterviewEngine {
 public:
  InterviewEngine(const store::SessionStore& store, InterviewConfig defaults,
                  Clock clock = clock_from_env());

  // Throws InvalidAlias, DuplicateAlias, InvalidConfig.
  SessionState start_session(const std::string& alias) const;
  SessionState start_session(const std::string& alias, const InterviewConfig& config) const;

  SessionState load(const std::string& alias) const;

  SessionState generate_core_questions(const SessionState& session,
                                       gateway::ModelGateway& gateway) const;
  // Throws UnknownQuestion, AlreadyAnswered, EmptyAnswer, WrongStage.
  SessionState submit_answer(const SessionState& session, const std::string& question_id,
                             const std::string& text) const;
  SessionState generate_followups(const SessionState& session,
                                  gateway::ModelGateway& gateway) const;
  SessionState generate_summary(const SessionState& session,
                                gateway::ModelGateway& gateway) const;
  SessionState close_session(const SessionState& session) const;

  // Prompt builders, exposed for inspection and tests.
  static gateway::PromptRequest core_prompt(const InterviewConfig& config);
  static gateway::PromptRequest followup_prompt(const InterviewConfig& config,
                                                const SessionState& session);
  static gateway::PromptRequest summary_prompt(const InterviewConfig& config,
                                               const SessionState& session);

  const store::SessionStore& store() const noexcept { return store_; }
  const InterviewConfig& defaults() const noexcept { return defaults_; }

 private:
  const store::SessionStore& store_;
  InterviewConfig defaults_;
  Clock clock_;
};

std::string session_id_for(const std::string& alias, const std::string& created_at);

}  // namespace persona_lab::interview
