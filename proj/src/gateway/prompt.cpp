#include "persona_lab/gateway/prompt.hpp"

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::gateway {

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void PromptRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::InvalidRequest, "request has no messages");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidRequest, "temperature must be >= 0");
  if (max_tokens && *max_tokens <= 0) {
    throw Error(ErrorCode::InvalidRequest, "max_tokens must be positive");
  }
  if (decode_mode == DecodeMode::Greedy && temperature != 0.0) {
    throw Error(ErrorCode::InvalidRequest, "greedy decoding requires temperature 0",
                {{"temperature", temperature}});
  }
}

nlohmann::json PromptRequest::canonical_json() const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"text", m.text}});
  }
  nlohmann::json j = {
      {"decode_mode", decode_mode == DecodeMode::Greedy ? "greedy" : "sampled"},
      {"messages", std::move(msgs)},
      {"temperature", temperature},
  };
  if (max_tokens) j["max_tokens"] = *max_tokens;
  if (top_p) j["top_p"] = *top_p;
  return j;
}

std::string PromptRequest::fingerprint() const { return sha256_hex(canonical(canonical_json())); }

const std::string& PromptRequest::last_user_text() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return it->text;
  }
  return kEmpty;
}

void TemperaturePolicy::validate() const {
  if (!(interview_min >= 0.0) || !(interview_max >= interview_min)) {
    throw Error(ErrorCode::InvalidConfig, "interview temperature range is empty or negative");
  }
  if (prediction_temperature != 0.0) {
    throw Error(ErrorCode::InvalidConfig,
                "prediction temperature must be 0 (predictions decode greedily)");
  }
}

}  // namespace persona_lab::gateway
