#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

#include "persona_lab/gateway/backend.hpp"

namespace persona_lab::gateway {

enum class CassetteMode { Record, Replay };

// Record wraps `live` and appends (fingerprint, response) lines to the
// cassette; Replay serves responses by request fingerprint and fails with
// CassetteMiss for anything unseen. Cassette lines are canonical UTF-8 JSON
// after a "persona-lab/v1 cassette" header.
std::shared_ptr<Backend> record_replay(std::shared_ptr<Backend> live, CassetteMode mode,
                                       const std::filesystem::path& cassette);

class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> live, std::filesystem::path cassette);
  std::string name() const override { return live_->name(); }
  std::string generate(const PromptRequest& request) override;

 private:
  std::shared_ptr<Backend> live_;
  std::filesystem::path cassette_;
  std::mutex mu_;
};

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& cassette);
  std::string name() const override { return name_; }
  std::string generate(const PromptRequest& request) override;
  std::size_t size() const { return responses_.size(); }

 private:
  std::string name_;
  std::map<std::string, std::string> responses_;
};

}  // namespace persona_lab::gateway
