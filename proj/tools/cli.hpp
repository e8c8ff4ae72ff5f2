#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/factory.hpp"
#include "persona_lab/interview/config.hpp"
#include "persona_lab/metrics/bootstrap.hpp"

namespace persona_lab::cli {

enum ExitStatus : int {
  kOk = 0,
  kValidation = 1,
  kRuntime = 2,
  kMismatch = 3,
};

// Runtime failures (I/O, backends, aborted runs, corrupt stores) exit 2;
// every other error is a validation failure and exits 1.
int exit_status_for(ErrorCode code) noexcept;

// Settings read from --config. Example:
//   {"backend": {"base_url": "...", "model": "...", "timeout_seconds": 120,
//                "api_key_env": "PERSONA_LAB_API_KEY"},
//    "temperature": {"interview_min": 0.8, "interview_max": 1.0,
//                    "interview": 0.9, "prediction": 0.0},
//    "followups": {"min": 3, "max": 6},
//    "bootstrap": {"replicates": 10000, "seed": 12345, "level": 0.95}}
// Every key is optional; unknown keys are rejected (InvalidConfig).
struct Settings {
  gateway::BackendSettings backend;
  interview::InterviewConfig interview;
  metrics::BootstrapOptions bootstrap;
};

Settings settings_from_json(const nlohmann::json& j);
Settings load_settings(const std::filesystem::path& path);

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace persona_lab::cli
