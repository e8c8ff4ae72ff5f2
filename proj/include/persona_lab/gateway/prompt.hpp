#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace persona_lab::gateway {

enum class Role { System, User, Assistant };
enum class DecodeMode { Sampled, Greedy };

struct ChatMessage {
  Role role = Role::User;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

std::string_view role_name(Role role) noexcept;

struct PromptRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::optional<double> top_p;
  DecodeMode decode_mode = DecodeMode::Greedy;

  // Throws Error(InvalidRequest): empty messages, negative temperature,
  // non-positive max_tokens, or Greedy with temperature != 0.
  void validate() const;

  nlohmann::json canonical_json() const;

  // SHA-256 of the canonical JSON. Timestamps are never part of a request.
  std::string fingerprint() const;

  // Text of the last user message ("" if there is none).
  const std::string& last_user_text() const;

  bool operator==(const PromptRequest&) const = default;
};

struct Completion {
  std::string text;
  std::string backend_name;
  std::int64_t latency_ms = 0;
  std::string request_fingerprint;
};

// Interview generation samples within `interview_range`; prediction and
// trace generation always decode greedily at `prediction_temperature`.
struct TemperaturePolicy {
  double interview_min = 0.8;
  double interview_max = 1.0;
  double prediction_temperature = 0.0;

  bool allows_interview(double t) const { return t >= interview_min && t <= interview_max; }
  void validate() const;
};

}  // namespace persona_lab::gateway
