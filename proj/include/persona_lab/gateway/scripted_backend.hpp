#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/backend.hpp"

namespace persona_lab::gateway {

// One canned exchange. A request matches when every string in `contains`
// occurs in the last user message (or anywhere in the request when
// `search_all_messages` is set). An empty `contains` matches anything.
struct ScriptEntry {
  std::vector<std::string> contains;
  bool search_all_messages = false;
  std::string response;
  // When set, the entry raises this error instead of answering.
  std::optional<ErrorCode> fail_with;
};

// Deterministic stand-in for a model. Strict mode replays entries in order and
// fails on the first request that does not match the next entry; non-strict
// mode answers with the first matching entry and may reuse entries.
class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(std::vector<ScriptEntry> script, bool strict, std::string name = "scripted");

  // Script file: header "persona-lab/v1 script", then one JSON record per
  // entry: {"contains": [...], "all": bool, "response": "...", "fail": "transport"}.
  // A leading {"strict": bool} record sets the mode (default non-strict).
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  std::string name() const override { return name_; }
  std::string generate(const PromptRequest& request) override;

  std::size_t calls() const;
  std::size_t remaining() const;

 private:
  bool matches(const ScriptEntry& entry, const PromptRequest& request) const;

  std::vector<ScriptEntry> script_;
  bool strict_;
  std::string name_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
  std::size_t calls_ = 0;
};

}  // namespace persona_lab::gateway
