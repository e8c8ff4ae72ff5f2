#include "persona_lab/store/events.hpp"

#include <algorithm>
#include <set>

#include "persona_lab/common/error.hpp"

namespace persona_lab::store {

using nlohmann::json;
using interview::AnswerTurn;
using interview::Question;
using interview::QuestionStage;
using interview::SessionState;
using interview::Stage;

namespace {

constexpr EventKind kAllKinds[] = {
    EventKind::SessionCreated,     EventKind::QuestionAsked,      EventKind::AnswerSubmitted,
    EventKind::FollowUpsGenerated, EventKind::SummaryGenerated,   EventKind::AssessmentRecorded,
    EventKind::SessionClosed,
};

[[noreturn]] void corrupt(const EventRecord& e, const std::string& why) {
  throw Error(ErrorCode::CorruptLog,
              "event " + std::to_string(e.seq) + " (" + std::string(event_kind_name(e.kind)) +
                  "): " + why,
              {{"seq", e.seq}});
}

void require_stage(const SessionState& s, const EventRecord& e, Stage expected) {
  if (s.stage != expected) {
    corrupt(e, "expected stage " + std::string(interview::stage_name(expected)) + ", found " +
                   std::string(interview::stage_name(s.stage)));
  }
}

json question_list(const std::vector<Question>& qs) {
  json arr = json::array();
  for (const auto& q : qs) arr.push_back(interview::to_json(q));
  return arr;
}

std::vector<Question> parse_questions(const json& payload) {
  std::vector<Question> out;
  for (const auto& q : payload.at("questions")) out.push_back(interview::question_from_json(q));
  return out;
}

EventRecord next(const SessionState& s, EventKind kind, json payload, const std::string& at) {
  return {s.session_id, s.last_seq + 1, kind, std::move(payload), at};
}

}  // namespace

std::string_view event_kind_name(EventKind k) noexcept {
  switch (k) {
    case EventKind::SessionCreated: return "SessionCreated";
    case EventKind::QuestionAsked: return "QuestionAsked";
    case EventKind::AnswerSubmitted: return "AnswerSubmitted";
    case EventKind::FollowUpsGenerated: return "FollowUpsGenerated";
    case EventKind::SummaryGenerated: return "SummaryGenerated";
    case EventKind::AssessmentRecorded: return "AssessmentRecorded";
    case EventKind::SessionClosed: return "SessionClosed";
  }
  return "";
}

std::optional<EventKind> event_kind_from_name(std::string_view name) noexcept {
  for (auto k : kAllKinds) {
    if (event_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

json to_json(const EventRecord& e) {
  return {{"session_id", e.session_id},
          {"seq", e.seq},
          {"kind", event_kind_name(e.kind)},
          {"payload", e.payload},
          {"at", e.at}};
}

EventRecord event_from_json(const json& j) {
  try {
    EventRecord e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::int64_t>();
    auto kind = event_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::CorruptLog, "unknown event kind");
    e.kind = *kind;
    e.payload = j.at("payload");
    e.at = j.at("at").get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::CorruptLog, std::string("malformed event: ") + ex.what());
  }
}

EventRecord session_created(const std::string& session_id, const std::string& alias,
                            const json& config_snapshot, const std::string& at) {
  return {session_id, 1, EventKind::SessionCreated,
          {{"participant_alias", alias}, {"config", config_snapshot}}, at};
}

EventRecord questions_asked(const SessionState& s, const std::vector<Question>& questions,
                            const std::string& prompt_fingerprint, const std::string& at) {
  return next(s, EventKind::QuestionAsked,
              {{"questions", question_list(questions)}, {"prompt_fingerprint", prompt_fingerprint}},
              at);
}

EventRecord answer_submitted(const SessionState& s, const std::string& question_id,
                             const std::string& text, const std::string& at) {
  return next(s, EventKind::AnswerSubmitted, {{"question_id", question_id}, {"text", text}}, at);
}

EventRecord followups_generated(const SessionState& s, const std::vector<Question>& questions,
                                const std::string& prompt_fingerprint, const std::string& at) {
  return next(s, EventKind::FollowUpsGenerated,
              {{"questions", question_list(questions)}, {"prompt_fingerprint", prompt_fingerprint}},
              at);
}

EventRecord summary_generated(const SessionState& s, const interview::PersonaSummary& summary,
                              const std::string& prompt_fingerprint, const std::string& at) {
  return next(s, EventKind::SummaryGenerated,
              {{"summary", interview::to_json(summary)}, {"prompt_fingerprint", prompt_fingerprint}},
              at);
}

EventRecord assessment_recorded(const SessionState& s, const std::string& assessment,
                                const std::string& sha256, const std::string& at) {
  return next(s, EventKind::AssessmentRecorded, {{"assessment", assessment}, {"sha256", sha256}},
              at);
}

EventRecord session_closed(const SessionState& s, const std::string& at) {
  return next(s, EventKind::SessionClosed, json::object(), at);
}

void apply_event(SessionState& s, const EventRecord& e) {
  if (e.seq != s.last_seq + 1) {
    corrupt(e, "expected seq " + std::to_string(s.last_seq + 1));
  }
  if (e.kind != EventKind::SessionCreated && e.session_id != s.session_id) {
    corrupt(e, "session id does not match the log");
  }
  try {
    switch (e.kind) {
      case EventKind::SessionCreated: {
        if (e.seq != 1) corrupt(e, "creation must be the first event");
        s.session_id = e.session_id;
        s.participant_alias = e.payload.at("participant_alias").get<std::string>();
        s.config_snapshot = e.payload.at("config");
        s.stage = Stage::Created;
        break;
      }
      case EventKind::QuestionAsked: {
        require_stage(s, e, Stage::Created);
        auto qs = parse_questions(e.payload);
        std::set<int> domains;
        for (const auto& q : qs) {
          if (q.stage != QuestionStage::Core || !q.domain_id) corrupt(e, "core question expected");
          domains.insert(*q.domain_id);
        }
        if (qs.size() != interview::kCoreQuestionCount || domains.size() != qs.size()) {
          corrupt(e, "core batch must cover ten distinct domains");
        }
        s.core_questions = std::move(qs);
        s.stage = Stage::CoreAsked;
        break;
      }
      case EventKind::AnswerSubmitted: {
        if (s.stage != Stage::CoreAsked && s.stage != Stage::FollowUpsAsked) {
          corrupt(e, "no questions are open");
        }
        const auto qid = e.payload.at("question_id").get<std::string>();
        const Question* q = s.find_question(qid);
        const QuestionStage open =
            s.stage == Stage::CoreAsked ? QuestionStage::Core : QuestionStage::FollowUp;
        if (!q || q->stage != open) corrupt(e, "question " + qid + " is not open");
        if (s.find_answer(qid)) corrupt(e, "question " + qid + " answered twice");
        s.answers.push_back({qid, e.payload.at("text").get<std::string>(), e.seq, e.at});
        const auto& list = open == QuestionStage::Core ? s.core_questions : s.followup_questions;
        if (s.answered_count(open) == list.size()) {
          s.stage = open == QuestionStage::Core ? Stage::CoreAnswered : Stage::FollowUpsAnswered;
        }
        break;
      }
      case EventKind::FollowUpsGenerated: {
        require_stage(s, e, Stage::CoreAnswered);
        auto qs = parse_questions(e.payload);
        if (qs.empty()) corrupt(e, "empty follow-up batch");
        for (const auto& q : qs) {
          if (q.stage != QuestionStage::FollowUp || q.domain_id) {
            corrupt(e, "follow-up question expected");
          }
        }
        s.followup_questions = std::move(qs);
        s.stage = Stage::FollowUpsAsked;
        break;
      }
      case EventKind::SummaryGenerated: {
        require_stage(s, e, Stage::FollowUpsAnswered);
        s.summary = interview::summary_from_json(e.payload.at("summary"));
        s.stage = Stage::Summarized;
        break;
      }
      case EventKind::AssessmentRecorded:
        // Assessments hang off the session without moving its stage.
        if (s.stage == Stage::Closed) corrupt(e, "session already closed");
        break;
      case EventKind::SessionClosed:
        require_stage(s, e, Stage::Summarized);
        s.stage = Stage::Closed;
        break;
    }
  } catch (const json::exception& ex) {
    corrupt(e, std::string("bad payload: ") + ex.what());
  }
  s.last_seq = e.seq;
}

SessionState fold(const std::vector<EventRecord>& events) {
  SessionState s;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

}  // namespace persona_lab::store
