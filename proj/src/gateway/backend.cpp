#include "persona_lab/gateway/backend.hpp"

#include <thread>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::gateway {

ModelGateway::ModelGateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::InvalidConfig, "gateway needs a backend");
  if (options_.retry.attempts < 1) options_.retry.attempts = 1;
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
  if (!options_.retry.sleep) {
    options_.retry.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::size_t ModelGateway::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

void ModelGateway::register_fingerprint(const std::string& fp, const std::string& canonical_text) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = fingerprints_.emplace(fp, canonical_text);
  if (!inserted && it->second != canonical_text) {
    throw Error(ErrorCode::FingerprintCollision, "two distinct requests share fingerprint " + fp);
  }
}

Completion ModelGateway::complete(const PromptRequest& request) {
  request.validate();
  const std::string canonical_text = canonical(request.canonical_json());
  const std::string fp = request.fingerprint();
  register_fingerprint(fp, canonical_text);

  {
    std::unique_lock lock(mu_);
    slot_free_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  struct SlotRelease {
    ModelGateway* self;
    ~SlotRelease() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->slot_free_.notify_one();
    }
  } release{this};

  auto backoff = options_.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    try {
      {
        std::lock_guard lock(mu_);
        ++calls_;
      }
      std::string text = backend_->generate(request);
      const auto elapsed = std::chrono::steady_clock::now() - start;
      return Completion{
          std::move(text), backend_->name(),
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count(), fp};
    } catch (const Error& e) {
      const bool transient =
          e.code() == ErrorCode::TransportError || e.code() == ErrorCode::Timeout;
      if (!transient) throw;
      if (attempt >= options_.retry.attempts) {
        if (e.code() == ErrorCode::Timeout) throw;
        throw Error(ErrorCode::BackendFailure,
                    "backend '" + backend_->name() + "' failed after " + std::to_string(attempt) +
                        " attempts: " + e.what(),
                    {{"attempts", attempt}});
      }
      options_.retry.sleep(backoff);
      backoff *= 2;
    }
  }
}

Completion complete(ModelGateway& gateway, const PromptRequest& request) {
  return gateway.complete(request);
}

}  // namespace persona_lab::gateway
