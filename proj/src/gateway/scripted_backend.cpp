#include "persona_lab/gateway/scripted_backend.hpp"

#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"

namespace persona_lab::gateway {

namespace {

std::string excerpt(std::string_view s, std::size_t n = 160) {
  if (s.size() <= n) return std::string(s);
  return std::string(s.substr(0, n)) + "...";
}

std::optional<ErrorCode> failure_from_name(const std::string& name) {
  if (name.empty()) return std::nullopt;
  if (name == "transport") return ErrorCode::TransportError;
  if (name == "timeout") return ErrorCode::Timeout;
  if (name == "auth") return ErrorCode::AuthFailure;
  if (name == "backend") return ErrorCode::BackendFailure;
  throw Error(ErrorCode::InvalidConfig, "unknown scripted failure '" + name + "'");
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, bool strict, std::string name)
    : script_(std::move(script)), strict_(strict), name_(std::move(name)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  auto file = read_record_file(path, "script", ErrorCode::InvalidConfig);
  bool strict = false;
  std::vector<ScriptEntry> entries;
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const auto& r = file.records[i];
    if (i == 0 && r.contains("strict") && !r.contains("response")) {
      strict = r.at("strict").get<bool>();
      continue;
    }
    ScriptEntry e;
    try {
      if (r.contains("contains")) e.contains = r.at("contains").get<std::vector<std::string>>();
      e.search_all_messages = r.value("all", false);
      e.response = r.value("response", "");
      e.fail_with = failure_from_name(r.value("fail", ""));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::InvalidConfig,
                  path.string() + ": bad script entry " + std::to_string(i + 1) + ": " + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return std::make_shared<ScriptedBackend>(std::move(entries), strict,
                                           "scripted:" + path.filename().string());
}

bool ScriptedBackend::matches(const ScriptEntry& entry, const PromptRequest& request) const {
  std::string haystack;
  if (entry.search_all_messages) {
    for (const auto& m : request.messages) {
      haystack += m.text;
      haystack.push_back('\n');
    }
  } else {
    haystack = request.last_user_text();
  }
  for (const auto& needle : entry.contains) {
    if (haystack.find(needle) == std::string::npos) return false;
  }
  return true;
}

std::string ScriptedBackend::generate(const PromptRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  const ScriptEntry* hit = nullptr;
  if (strict_) {
    if (cursor_ >= script_.size()) {
      throw Error(ErrorCode::BackendFailure, "strict script exhausted",
                  {{"expected", nullptr}, {"actual", excerpt(request.last_user_text())}});
    }
    const ScriptEntry& next = script_[cursor_];
    if (!matches(next, request)) {
      throw Error(ErrorCode::BackendFailure,
                  "request does not match script entry " + std::to_string(cursor_ + 1),
                  {{"entry", cursor_ + 1},
                   {"expected", {{"contains", next.contains}}},
                   {"actual", excerpt(request.last_user_text())}});
    }
    ++cursor_;
    hit = &next;
  } else {
    for (const auto& e : script_) {
      if (matches(e, request)) {
        hit = &e;
        break;
      }
    }
    if (!hit) {
      throw Error(ErrorCode::BackendFailure, "no script entry matches the request",
                  {{"actual", excerpt(request.last_user_text())}});
    }
  }
  if (hit->fail_with) {
    throw Error(*hit->fail_with, "scripted failure");
  }
  return hit->response;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return strict_ ? script_.size() - cursor_ : script_.size();
}

}  // namespace persona_lab::gateway
