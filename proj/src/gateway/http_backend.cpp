#include "persona_lab/gateway/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "persona_lab/common/error.hpp"

namespace persona_lab::gateway {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::InvalidConfig, "http backend needs a base URL");
  }
  if (config_.model.empty()) throw Error(ErrorCode::InvalidConfig, "http backend needs a model");
}

std::string HttpBackend::generate(const PromptRequest& request) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) {
    throw Error(ErrorCode::AuthFailure, "credential variable " + config_.api_key_env + " is not set");
  }

  nlohmann::json body = {{"model", config_.model}, {"temperature", request.temperature}};
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.text}});
  }
  body["messages"] = std::move(messages);
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
  if (request.top_p) body["top_p"] = *request.top_p;

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, "request to " + config_.base_url + " timed out");
    }
    throw Error(ErrorCode::TransportError,
                "transport error talking to " + config_.base_url + ": " + httplib::to_string(err));
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::AuthFailure, "backend rejected credentials",
                {{"status", res->status}});
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::TransportError, "backend returned HTTP " + std::to_string(res->status),
                {{"status", res->status}});
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendFailure, "backend returned HTTP " + std::to_string(res->status),
                {{"status", res->status}});
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  try {
    if (reply.is_discarded()) throw std::runtime_error("body is not JSON");
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BackendFailure,
                std::string("unexpected chat-completion response: ") + e.what());
  }
}

}  // namespace persona_lab::gateway
