#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "persona_lab/gateway/prompt.hpp"

namespace persona_lab::gateway {

// A text-generation backend. Implementations throw Error with
// TransportError or Timeout for transient failures (retried by the gateway),
// AuthFailure for credential problems, and BackendFailure otherwise.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual std::string generate(const PromptRequest& request) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  // Replaceable so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct GatewayOptions {
  RetryPolicy retry;
  int max_in_flight = 4;
};

// The "backend handle" the rest of the system talks to: request validation,
// bounded retries on transport failures, an in-flight cap, and fingerprint
// collision detection. Shareable across threads.
class ModelGateway {
 public:
  explicit ModelGateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  Completion complete(const PromptRequest& request);

  std::string backend_name() const { return backend_->name(); }
  std::size_t calls() const;

 private:
  void register_fingerprint(const std::string& fp, const std::string& canonical_text);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;

  mutable std::mutex mu_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  std::size_t calls_ = 0;
  std::map<std::string, std::string> fingerprints_;
};

// Free-function form of ModelGateway::complete.
Completion complete(ModelGateway& gateway, const PromptRequest& request);

}  // namespace persona_lab::gateway
