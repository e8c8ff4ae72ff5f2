#include "persona_lab/interview/engine.hpp"

#include <functional>

#include "persona_lab/common/alias.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"
#include "persona_lab/interview/output_parser.hpp"

namespace persona_lab::interview {

using gateway::ChatMessage;
using gateway::ModelGateway;
using gateway::PromptRequest;
using gateway::Role;

namespace {

constexpr const char* kCoreInstruction =
    "Begin Stage 1. Write the ten core questions using the Stage 1 output template: one "
    "question per domain, in domain order 1 to 10, each line starting with its number "
    "followed by the tag [Domain k].";

constexpr const char* kFollowUpInstruction =
    "All ten answers are in. Proceed to Stage 2 and write the follow-up questions using the "
    "Stage 2 output template (F1., F2., ...). Mention the core question a follow-up builds on "
    "as Q<k> where it helps.";

constexpr const char* kSummaryInstruction =
    "The follow-up answers are in. Summarize the participant's personality insights per "
    "domain. Start each section with a header line 'Domain k: <domain name>' for k = 1 to 10.";

std::string stage_str(Stage s) { return std::string(stage_name(s)); }

void require_stage(const SessionState& s, Stage expected, const char* op) {
  if (s.stage != expected) {
    throw Error(ErrorCode::WrongStage,
                std::string(op) + " needs stage " + stage_str(expected) + ", session " +
                    s.participant_alias + " is at " + stage_str(s.stage),
                {{"stage", stage_str(s.stage)}, {"expected", stage_str(expected)}});
  }
}

// Re-reads the persisted state under the lock and rejects stale callers.
SessionState current_state(const store::SessionStore& store, const SessionState& caller) {
  SessionState latest = store.load_session(caller.participant_alias);
  if (latest.last_seq != caller.last_seq) {
    throw Error(ErrorCode::SeqConflict,
                "session " + caller.participant_alias + " moved on (seq " +
                    std::to_string(latest.last_seq) + ", caller has " +
                    std::to_string(caller.last_seq) + ")",
                {{"expected_seq", latest.last_seq}, {"seq", caller.last_seq}});
  }
  return latest;
}

PromptRequest interview_request(const InterviewConfig& config) {
  PromptRequest req;
  req.temperature = config.interview_temperature;
  req.decode_mode = gateway::DecodeMode::Sampled;
  req.messages.push_back({Role::System, config.render_meta_prompt()});
  return req;
}

std::string render_core_listing(const SessionState& s) {
  std::string out = "Stage 1 – Ten Questions:\n";
  for (std::size_t i = 0; i < s.core_questions.size(); ++i) {
    const auto& q = s.core_questions[i];
    out += std::to_string(i + 1) + ". [Domain " + std::to_string(*q.domain_id) + "] " + q.text +
           "\n";
  }
  return out;
}

std::string render_answers(const SessionState& s, const std::vector<Question>& questions,
                           bool core_numbering) {
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    const auto* a = s.find_answer(q.question_id);
    const std::string label =
        core_numbering ? "Q" + std::to_string(i + 1) : q.question_id;
    out += label + ". " + q.text + "\nAnswer: " + (a ? a->text : std::string()) + "\n\n";
  }
  return out;
}

std::string render_followup_listing(const SessionState& s) {
  std::string out = "Stage 2 – Follow-Up Questions:\n";
  for (const auto& q : s.followup_questions) out += q.question_id + ". " + q.text + "\n";
  return out;
}

// Runs the request, parsing with `parse`; a malformed reply is shown back to
// the model with the reason, up to `retries` more times.
template <typename T>
std::pair<T, std::string> generate_with_retry(ModelGateway& gw, PromptRequest req, int retries,
                                              const std::function<T(const std::string&)>& parse,
                                              const store::SessionStore& store,
                                              const std::string& alias, const char* what) {
  for (int attempt = 0;; ++attempt) {
    const auto completion = gw.complete(req);
    try {
      return {parse(completion.text), req.fingerprint()};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedModelOutput) throw;
      // Keep the rejected text next to the session for inspection.
      write_text_file(store.session_dir(alias) / "rejected" /
                          (std::string(what) + "-" + std::to_string(attempt + 1) + ".txt"),
                      completion.text);
      if (attempt >= retries) throw;
      req.messages.push_back({Role::Assistant, completion.text});
      req.messages.push_back(
          {Role::User, std::string("That reply could not be used: ") + e.what() +
                           ". Reply again following the output template exactly."});
    }
  }
}

InterviewConfig config_of(const SessionState& s) { return InterviewConfig::from_snapshot(s.config_snapshot); }

}  // namespace

std::string session_id_for(const std::string& alias, const std::string& created_at) {
  return "s-" + sha256_hex("session:" + alias + "@" + created_at).substr(0, 20);
}

InterviewEngine::InterviewEngine(const store::SessionStore& store, InterviewConfig defaults,
                                 Clock clock)
    : store_(store), defaults_(std::move(defaults)), clock_(std::move(clock)) {}

SessionState InterviewEngine::start_session(const std::string& alias) const {
  return start_session(alias, defaults_);
}

SessionState InterviewEngine::start_session(const std::string& alias,
                                            const InterviewConfig& config) const {
  require_valid_alias(alias);
  config.validate();
  auto lock = store_.lock(alias);
  if (store_.has_session(alias)) {
    throw Error(ErrorCode::DuplicateAlias, "alias " + alias + " already has a session",
                {{"alias", alias}});
  }
  const std::string at = to_rfc3339(clock_());
  store_.append_event(lock, store::session_created(session_id_for(alias, at), alias,
                                                   config.snapshot(), at));
  return store_.load_session(alias);
}

SessionState InterviewEngine::load(const std::string& alias) const {
  return store_.load_session(alias);
}

PromptRequest InterviewEngine::core_prompt(const InterviewConfig& config) {
  PromptRequest req = interview_request(config);
  req.messages.push_back({Role::User, kCoreInstruction});
  return req;
}

PromptRequest InterviewEngine::followup_prompt(const InterviewConfig& config,
                                               const SessionState& s) {
  PromptRequest req = core_prompt(config);
  req.messages.push_back({Role::Assistant, render_core_listing(s)});
  req.messages.push_back({Role::User, "Here are my answers to the ten questions.\n\n" +
                                          render_answers(s, s.core_questions, true)});
  req.messages.push_back({Role::User, kFollowUpInstruction});
  return req;
}

PromptRequest InterviewEngine::summary_prompt(const InterviewConfig& config,
                                              const SessionState& s) {
  PromptRequest req = followup_prompt(config, s);
  req.messages.push_back({Role::Assistant, render_followup_listing(s)});
  req.messages.push_back({Role::User, "Here are my answers to the follow-up questions.\n\n" +
                                          render_answers(s, s.followup_questions, false)});
  std::string domains = "Domains:\n";
  for (const auto& d : config.domains.domains()) {
    domains += std::to_string(d.domain_id) + ". " + d.name + "\n";
  }
  req.messages.push_back({Role::User, std::string(kSummaryInstruction) + "\n" + domains});
  return req;
}

SessionState InterviewEngine::generate_core_questions(const SessionState& session,
                                                      ModelGateway& gw) const {
  auto lock = store_.lock(session.participant_alias);
  const SessionState s = current_state(store_, session);
  require_stage(s, Stage::Created, "generate_core_questions");
  const InterviewConfig config = config_of(s);
  std::function<std::vector<Question>(const std::string&)> parse =
      [&](const std::string& raw) { return parse_core_questions(raw, config.domains); };
  auto [questions, fp] = generate_with_retry(gw, core_prompt(config), config.malformed_retries,
                                             parse, store_, s.participant_alias, "core");
  store_.append_event(lock, store::questions_asked(s, questions, fp, to_rfc3339(clock_())));
  return store_.load_session(s.participant_alias);
}

SessionState InterviewEngine::submit_answer(const SessionState& session,
                                            const std::string& question_id,
                                            const std::string& text) const {
  auto lock = store_.lock(session.participant_alias);
  const SessionState s = current_state(store_, session);
  if (s.stage != Stage::CoreAsked && s.stage != Stage::FollowUpsAsked) {
    throw Error(ErrorCode::WrongStage,
                "no questions are open at stage " + stage_str(s.stage),
                {{"stage", stage_str(s.stage)}});
  }
  const Question* q = s.find_question(question_id);
  if (!q) {
    throw Error(ErrorCode::UnknownQuestion, "no question " + question_id,
                {{"question_id", question_id}});
  }
  const QuestionStage open =
      s.stage == Stage::CoreAsked ? QuestionStage::Core : QuestionStage::FollowUp;
  if (q->stage != open) {
    throw Error(ErrorCode::WrongStage,
                question_id + " is not open at stage " + stage_str(s.stage),
                {{"stage", stage_str(s.stage)}, {"question_id", question_id}});
  }
  if (s.find_answer(question_id)) {
    throw Error(ErrorCode::AlreadyAnswered, question_id + " is already answered",
                {{"question_id", question_id}});
  }
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::EmptyAnswer, "answer to " + question_id + " is empty",
                {{"question_id", question_id}});
  }
  store_.append_event(lock, store::answer_submitted(s, question_id, text, to_rfc3339(clock_())));
  return store_.load_session(s.participant_alias);
}

SessionState InterviewEngine::generate_followups(const SessionState& session,
                                                 ModelGateway& gw) const {
  auto lock = store_.lock(session.participant_alias);
  const SessionState s = current_state(store_, session);
  require_stage(s, Stage::CoreAnswered, "generate_followups");
  const InterviewConfig config = config_of(s);
  std::function<std::vector<Question>(const std::string&)> parse =
      [&](const std::string& raw) { return parse_followups(raw, config.followups, s); };
  auto [questions, fp] =
      generate_with_retry(gw, followup_prompt(config, s), config.malformed_retries, parse,
                          store_, s.participant_alias, "followups");
  store_.append_event(lock, store::followups_generated(s, questions, fp, to_rfc3339(clock_())));
  return store_.load_session(s.participant_alias);
}

SessionState InterviewEngine::generate_summary(const SessionState& session,
                                               ModelGateway& gw) const {
  auto lock = store_.lock(session.participant_alias);
  const SessionState s = current_state(store_, session);
  require_stage(s, Stage::FollowUpsAnswered, "generate_summary");
  const InterviewConfig config = config_of(s);
  std::function<PersonaSummary(const std::string&)> parse = [&](const std::string& raw) {
    return parse_summary(raw, config.domains);
  };
  auto [summary, fp] = generate_with_retry(gw, summary_prompt(config, s),
                                           config.malformed_retries, parse, store_,
                                           s.participant_alias, "summary");
  store_.append_event(lock, store::summary_generated(s, summary, fp, to_rfc3339(clock_())));
  return store_.load_session(s.participant_alias);
}

SessionState InterviewEngine::close_session(const SessionState& session) const {
  auto lock = store_.lock(session.participant_alias);
  const SessionState s = current_state(store_, session);
  require_stage(s, Stage::Summarized, "close_session");
  store_.append_event(lock, store::session_closed(s, to_rfc3339(clock_())));
  return store_.load_session(s.participant_alias);
}

}  // namespace persona_lab::interview
