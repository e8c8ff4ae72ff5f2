#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/common/clock.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/backend.hpp"
#include "persona_lab/interview/config.hpp"
#include "persona_lab/interview/engine.hpp"
#include "persona_lab/metrics/bootstrap.hpp"
#include "persona_lab/store/run_store.hpp"
#include "persona_lab/store/session_store.hpp"

namespace httplib {
class Server;
}

namespace persona_lab::api {

struct ServiceConfig {
  std::filesystem::path store_root;
  // Bearer credential for operator endpoints. Empty: every operator request
  // is refused.
  std::string admin_token;
  // Model used for interview question and summary generation.
  std::shared_ptr<gateway::ModelGateway> interview_gateway;
  interview::InterviewConfig interview;
  // Battery for dilemma responses and the default battery for runs.
  assessments::Battery battery;
  // Resolves the "backend" reference of a run request.
  std::function<std::shared_ptr<gateway::Backend>(const std::string&)> backend_factory;
  // Generate follow-ups and the summary as soon as a stage is fully answered.
  bool auto_advance = true;
  Clock clock = clock_from_env();
  metrics::BootstrapOptions bootstrap;
  bool durable = true;
};

int http_status(ErrorCode code) noexcept;
// {"code": TOKEN, "message": ..., "details": {...}}
nlohmann::json error_body(const Error& e);

// Routes:
//   POST /v1/sessions                           {alias} -> {session_id, token}
//   GET  /v1/sessions/{id}/pending              participant token
//   POST /v1/sessions/{id}/answers              participant token
//   POST /v1/sessions/{id}/advance              participant token
//   POST /v1/sessions/{id}/assessments/{kind}   participant token
//   POST /v1/runs                               operator token
//   GET  /v1/runs/{id}                          operator token
//   GET  /v1/runs/{id}/report                   operator token
//   GET  /v1/health
// Participant tokens go in "Authorization: Bearer <token>" or
// "X-Session-Token"; only a SHA-256 of each token is stored.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  // Blocks until background runs have finished.
  void wait_for_runs();

  // Request handlers, callable without HTTP. `token` is the presented
  // credential. Each returns the response body or throws Error.
  nlohmann::json create_session(const nlohmann::json& body);
  nlohmann::json pending(const std::string& session_id, const std::string& token);
  nlohmann::json submit_answer(const std::string& session_id, const std::string& token,
                               const nlohmann::json& body);
  nlohmann::json advance(const std::string& session_id, const std::string& token);
  nlohmann::json record_assessment(const std::string& session_id, const std::string& token,
                                   const std::string& kind, const nlohmann::json& body);
  nlohmann::json launch_run(const std::string& token, const nlohmann::json& body);
  nlohmann::json run_status(const std::string& token, const std::string& run_id);
  nlohmann::json run_report(const std::string& token, const std::string& run_id);

 private:
  struct RunState {
    std::string state = "running";  // running, done, failed
    std::size_t done = 0;
    std::size_t total = 0;
    std::vector<std::string> conditions;
    std::optional<nlohmann::json> error;
    std::optional<nlohmann::json> report;
  };

  std::string authorize_session(const std::string& session_id, const std::string& token) const;
  void authorize_operator(const std::string& token) const;
  interview::SessionState advance_once(const interview::SessionState& s,
                                       std::optional<nlohmann::json>* error);
  nlohmann::json session_view(const interview::SessionState& s) const;
  std::string next_run_id();

  ServiceConfig config_;
  store::SessionStore sessions_;
  store::RunStore runs_;
  interview::InterviewEngine engine_;

  std::mutex mu_;
  std::map<std::string, RunState> run_states_;
  std::vector<std::thread> workers_;
};

}  // namespace persona_lab::api
