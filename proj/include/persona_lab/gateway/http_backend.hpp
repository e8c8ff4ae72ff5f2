#pragma once

#include <string>

#include "persona_lab/gateway/backend.hpp"

namespace persona_lab::gateway {

struct HttpBackendConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  int timeout_seconds = 120;
  // Name of the environment variable holding the bearer credential. The
  // credential itself is read per request and never stored or logged.
  std::string api_key_env = "PERSONA_LAB_API_KEY";
};

// Chat-completion endpoint speaking the common OpenAI-style wire format.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string name() const override { return "http:" + config_.model; }
  std::string generate(const PromptRequest& request) override;

 private:
  HttpBackendConfig config_;
};

}  // namespace persona_lab::gateway
