#pragma once

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/interview/session.hpp"
#include "persona_lab/store/events.hpp"

namespace persona_lab::store {

// Exclusive advisory lock on sessions/<alias>/.lock. A default-constructed
// lock holds nothing.
class SessionLock {
 public:
  SessionLock() = default;
  SessionLock(std::string alias, int fd) : alias_(std::move(alias)), fd_(fd) {}
  SessionLock(SessionLock&& other) noexcept;
  SessionLock& operator=(SessionLock&& other) noexcept;
  SessionLock(const SessionLock&) = delete;
  SessionLock& operator=(const SessionLock&) = delete;
  ~SessionLock();

  bool held() const noexcept { return fd_ >= 0; }
  const std::string& alias() const noexcept { return alias_; }
  void release() noexcept;

 private:
  std::string alias_;
  int fd_ = -1;
};

// Masks personal identifiers in exported text.
class Redactor {
 public:
  // Emails and phone numbers.
  static Redactor defaults();
  explicit Redactor(std::vector<std::string> patterns, std::string mask = "[REDACTED]");

  std::string apply(const std::string& text) const;
  bool matches(const std::string& text) const;
  const std::vector<std::string>& patterns() const noexcept { return sources_; }

 private:
  std::vector<std::string> sources_;
  std::vector<std::regex> compiled_;
  std::string mask_;
};

class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root, bool durable = true);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path session_dir(const std::string& alias) const;
  std::filesystem::path events_path(const std::string& alias) const;

  bool has_session(const std::string& alias) const;
  std::vector<std::string> list_aliases() const;

  // Blocks until the alias's writer lock is acquired. Throws InvalidAlias.
  SessionLock lock(const std::string& alias) const;
  std::optional<SessionLock> try_lock(const std::string& alias) const;

  // Returns the event's seq. Throws LockNotHeld, SeqConflict or IoFailure.
  std::int64_t append_event(const SessionLock& lock, const EventRecord& event) const;

  // Throws UnknownSession or CorruptLog (details carry the line number).
  std::vector<EventRecord> load_events(const std::string& alias) const;
  interview::SessionState load_session(const std::string& alias) const;

  std::optional<std::string> alias_for_session_id(const std::string& session_id) const;

  // Writes sessions/<alias>/assessments/<name>.json and logs an
  // AssessmentRecorded event carrying the document's hash.
  void record_assessment(const SessionLock& lock, const std::string& name,
                         const nlohmann::json& document, const std::string& at) const;
  std::optional<nlohmann::json> load_assessment(const std::string& alias,
                                                const std::string& name) const;

  // Ordered Q/A document. Needs stage >= CoreAnswered (StageTooEarly).
  nlohmann::json export_transcript(const std::string& alias, bool redact,
                                   const Redactor& redactor = Redactor::defaults()) const;
  // Same document written to exports/<alias>.transcript.json under the root.
  std::filesystem::path write_transcript_export(const std::string& alias, bool redact,
                                                const Redactor& redactor =
                                                    Redactor::defaults()) const;

 private:
  std::filesystem::path root_;
  bool durable_;
};

}  // namespace persona_lab::store
