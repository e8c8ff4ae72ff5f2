#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "persona_lab/gateway/backend.hpp"

namespace persona_lab::gateway {

struct BackendSettings {
  std::string base_url;  // falls back to PERSONA_LAB_BASE_URL
  std::string model;
  int timeout_seconds = 120;
  std::string api_key_env = "PERSONA_LAB_API_KEY";
};

// Backend references:
//   scripted:<file>    ScriptedBackend::from_file
//   replay:<cassette>  serve recorded responses only
//   record:<cassette>  live HTTP backend, responses appended to the cassette
//   http[:<model>]     live HTTP backend
// Throws InvalidConfig for anything else.
std::shared_ptr<Backend> make_backend(std::string_view ref, const BackendSettings& settings);

}  // namespace persona_lab::gateway
