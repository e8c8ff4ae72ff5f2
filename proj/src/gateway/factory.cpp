#include "persona_lab/gateway/factory.hpp"

#include <cstdlib>

#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/cassette.hpp"
#include "persona_lab/gateway/http_backend.hpp"
#include "persona_lab/gateway/scripted_backend.hpp"

namespace persona_lab::gateway {

namespace {

std::shared_ptr<Backend> http_backend(const BackendSettings& settings, std::string model) {
  HttpBackendConfig c;
  c.base_url = settings.base_url;
  if (c.base_url.empty()) {
    if (const char* env = std::getenv("PERSONA_LAB_BASE_URL")) c.base_url = env;
  }
  c.model = model.empty() ? settings.model : std::move(model);
  c.timeout_seconds = settings.timeout_seconds;
  c.api_key_env = settings.api_key_env;
  return std::make_shared<HttpBackend>(std::move(c));
}

}  // namespace

std::shared_ptr<Backend> make_backend(std::string_view ref, const BackendSettings& settings) {
  const auto colon = ref.find(':');
  const std::string kind(ref.substr(0, colon));
  const std::string arg = colon == std::string_view::npos ? "" : std::string(ref.substr(colon + 1));
  if (kind == "scripted" && !arg.empty()) return ScriptedBackend::from_file(arg);
  if (kind == "replay" && !arg.empty()) return std::make_shared<ReplayBackend>(arg);
  if (kind == "record" && !arg.empty()) {
    return record_replay(http_backend(settings, ""), CassetteMode::Record, arg);
  }
  if (kind == "http") return http_backend(settings, arg);
  throw Error(ErrorCode::InvalidConfig,
              "unknown backend '" + std::string(ref) +
                  "' (scripted:<file>, replay:<cassette>, record:<cassette>, http[:<model>])");
}

}  // namespace persona_lab::gateway
