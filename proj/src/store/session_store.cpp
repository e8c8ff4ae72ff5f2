#include "persona_lab/store/session_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "persona_lab/common/alias.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::store {

namespace fs = std::filesystem;
using nlohmann::json;
using interview::SessionState;
using interview::Stage;

namespace {

constexpr std::string_view kEventsKind = "events";

int open_lock_file(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path p = dir / ".lock";
  int fd = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::IoFailure, "cannot open " + p.string() + ": " + std::strerror(errno));
  }
  return fd;
}

}  // namespace

SessionLock::SessionLock(SessionLock&& other) noexcept
    : alias_(std::move(other.alias_)), fd_(other.fd_) {
  other.fd_ = -1;
}

SessionLock& SessionLock::operator=(SessionLock&& other) noexcept {
  if (this != &other) {
    release();
    alias_ = std::move(other.alias_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

SessionLock::~SessionLock() { release(); }

void SessionLock::release() noexcept {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
    fd_ = -1;
  }
}

Redactor Redactor::defaults() {
  return Redactor({
      R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})",
      R"((\+?\d{1,3}[ .-]?)?(\(\d{2,4}\)[ .-]?)?\d{3,4}[ .-]\d{3,4}([ .-]\d{2,4})?)",
  });
}

Redactor::Redactor(std::vector<std::string> patterns, std::string mask)
    : sources_(std::move(patterns)), mask_(std::move(mask)) {
  for (const auto& p : sources_) {
    try {
      compiled_.emplace_back(p, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::InvalidConfig, "bad redaction pattern '" + p + "': " + e.what());
    }
  }
}

std::string Redactor::apply(const std::string& text) const {
  std::string out = text;
  for (const auto& re : compiled_) out = std::regex_replace(out, re, mask_);
  return out;
}

bool Redactor::matches(const std::string& text) const {
  return std::any_of(compiled_.begin(), compiled_.end(),
                     [&](const std::regex& re) { return std::regex_search(text, re); });
}

SessionStore::SessionStore(fs::path root, bool durable)
    : root_(std::move(root)), durable_(durable) {
  fs::create_directories(root_ / "sessions");
}

fs::path SessionStore::session_dir(const std::string& alias) const {
  require_valid_alias(alias);
  return root_ / "sessions" / alias;
}

fs::path SessionStore::events_path(const std::string& alias) const {
  return session_dir(alias) / "events.log";
}

bool SessionStore::has_session(const std::string& alias) const {
  return is_valid_alias(alias) && fs::exists(events_path(alias));
}

std::vector<std::string> SessionStore::list_aliases() const {
  std::vector<std::string> out;
  const fs::path dir = root_ / "sessions";
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && is_valid_alias(name) && fs::exists(entry.path() / "events.log")) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SessionLock SessionStore::lock(const std::string& alias) const {
  int fd = open_lock_file(session_dir(alias));
  while (::flock(fd, LOCK_EX) != 0) {
    if (errno == EINTR) continue;
    ::close(fd);
    throw Error(ErrorCode::IoFailure, "flock failed for " + alias);
  }
  return SessionLock(alias, fd);
}

std::optional<SessionLock> SessionStore::try_lock(const std::string& alias) const {
  int fd = open_lock_file(session_dir(alias));
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    return std::nullopt;
  }
  return SessionLock(alias, fd);
}

std::int64_t SessionStore::append_event(const SessionLock& lock, const EventRecord& event) const {
  if (!lock.held()) {
    throw Error(ErrorCode::LockNotHeld, "appending requires the session writer lock");
  }
  const fs::path path = events_path(lock.alias());
  std::int64_t last = 0;
  std::string session_id;
  if (fs::exists(path)) {
    auto events = load_events(lock.alias());
    if (!events.empty()) {
      last = events.back().seq;
      session_id = events.front().session_id;
    }
  }
  if (event.seq != last + 1) {
    throw Error(ErrorCode::SeqConflict,
                "expected seq " + std::to_string(last + 1) + ", got " + std::to_string(event.seq),
                {{"expected_seq", last + 1}, {"seq", event.seq}});
  }
  if (!session_id.empty() && event.session_id != session_id) {
    throw Error(ErrorCode::SeqConflict, "event belongs to another session",
                {{"session_id", session_id}});
  }
  append_record(path, kEventsKind, to_json(event), durable_);
  return event.seq;
}

std::vector<EventRecord> SessionStore::load_events(const std::string& alias) const {
  const fs::path path = events_path(alias);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::UnknownSession, "no session for " + alias, {{"alias", alias}});
  }
  auto file = read_record_file(path, kEventsKind, ErrorCode::CorruptLog);
  std::vector<EventRecord> events;
  events.reserve(file.records.size());
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    try {
      events.push_back(event_from_json(file.records[i]));
    } catch (const Error& e) {
      // +2: header line plus 1-based numbering.
      throw Error(ErrorCode::CorruptLog,
                  "events.log line " + std::to_string(i + 2) + ": " + e.what(),
                  {{"line", i + 2}, {"path", path.string()}});
    }
  }
  return events;
}

SessionState SessionStore::load_session(const std::string& alias) const {
  auto events = load_events(alias);
  SessionState state;
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      apply_event(state, events[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptLog,
                  "events.log line " + std::to_string(i + 2) + ": " + e.what(),
                  {{"line", i + 2}});
    }
  }
  if (state.participant_alias != alias) {
    throw Error(ErrorCode::CorruptLog, "log for " + alias + " names " + state.participant_alias,
                {{"line", 2}});
  }
  return state;
}

std::optional<std::string> SessionStore::alias_for_session_id(const std::string& session_id) const {
  for (const auto& alias : list_aliases()) {
    auto file = read_record_file(events_path(alias), kEventsKind, ErrorCode::CorruptLog);
    if (!file.records.empty() && file.records.front().value("session_id", "") == session_id) {
      return alias;
    }
  }
  return std::nullopt;
}

void SessionStore::record_assessment(const SessionLock& lock, const std::string& name,
                                     const json& document, const std::string& at) const {
  if (!lock.held()) {
    throw Error(ErrorCode::LockNotHeld, "recording an assessment requires the session lock");
  }
  const SessionState state = load_session(lock.alias());
  const std::string body = canonical(document) + "\n";
  write_text_file(session_dir(lock.alias()) / "assessments" / (name + ".json"), body);
  append_event(lock, assessment_recorded(state, name, sha256_hex(body), at));
}

std::optional<json> SessionStore::load_assessment(const std::string& alias,
                                                  const std::string& name) const {
  const fs::path p = session_dir(alias) / "assessments" / (name + ".json");
  if (!fs::exists(p)) return std::nullopt;
  const std::string body = read_text_file(p);
  // The latest AssessmentRecorded event for this name pins the content.
  std::optional<std::string> expected;
  for (const auto& e : load_events(alias)) {
    if (e.kind == EventKind::AssessmentRecorded && e.payload.value("assessment", "") == name) {
      expected = e.payload.value("sha256", "");
    }
  }
  if (expected && *expected != sha256_hex(body)) {
    throw Error(ErrorCode::HashMismatch, "assessment " + name + " for " + alias + " was modified",
                {{"alias", alias}, {"assessment", name}});
  }
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::CorruptLog, "unreadable assessment " + p.string());
  return doc;
}

json SessionStore::export_transcript(const std::string& alias, bool redact,
                                     const Redactor& redactor) const {
  const SessionState s = load_session(alias);
  if (s.stage < Stage::CoreAnswered) {
    throw Error(ErrorCode::StageTooEarly,
                "transcript export needs stage CoreAnswered, session is at " +
                    std::string(interview::stage_name(s.stage)),
                {{"alias", alias}});
  }
  auto answers = s.answers;
  std::sort(answers.begin(), answers.end(),
            [](const auto& a, const auto& b) { return a.seq < b.seq; });
  json entries = json::array();
  for (const auto& a : answers) {
    const auto* q = s.find_question(a.question_id);
    json e = {{"question_id", a.question_id},
              {"stage", interview::question_stage_name(q->stage)},
              {"question", redact ? redactor.apply(q->text) : q->text},
              {"answer", redact ? redactor.apply(a.text) : a.text},
              {"seq", a.seq}};
    if (q->domain_id) e["domain_id"] = *q->domain_id;
    entries.push_back(std::move(e));
  }
  json doc = {{"participant_alias", alias},
              {"session_id", s.session_id},
              {"stage", interview::stage_name(s.stage)},
              {"redacted", redact},
              {"entries", std::move(entries)}};
  if (s.summary) {
    doc["summary"] = redact ? redactor.apply(s.summary->full_text) : s.summary->full_text;
  }
  return doc;
}

fs::path SessionStore::write_transcript_export(const std::string& alias, bool redact,
                                               const Redactor& redactor) const {
  const json doc = export_transcript(alias, redact, redactor);
  const fs::path out = root_ / "exports" / (alias + ".transcript.json");
  write_text_file(out, doc.dump(2) + "\n");
  return out;
}

}  // namespace persona_lab::store
