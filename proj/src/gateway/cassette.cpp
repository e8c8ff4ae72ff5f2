#include "persona_lab/gateway/cassette.hpp"

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::gateway {

namespace fs = std::filesystem;

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> live, fs::path cassette)
    : live_(std::move(live)), cassette_(std::move(cassette)) {}

std::string RecordingBackend::generate(const PromptRequest& request) {
  std::string text = live_->generate(request);
  std::lock_guard lock(mu_);
  append_record(cassette_, "cassette", {{"fingerprint", request.fingerprint()}, {"response", text}},
                /*durable=*/true);
  return text;
}

ReplayBackend::ReplayBackend(const fs::path& cassette) : name_("replay:" + cassette.filename().string()) {
  if (!fs::exists(cassette)) {
    throw Error(ErrorCode::InvalidConfig, "cassette not found: " + cassette.string());
  }
  auto file = read_record_file(cassette, "cassette", ErrorCode::CassetteCorrupt);
  std::size_t line = 1;
  for (const auto& r : file.records) {
    ++line;
    if (!r.contains("fingerprint") || !r["fingerprint"].is_string() || !r.contains("response") ||
        !r["response"].is_string()) {
      throw Error(ErrorCode::CassetteCorrupt,
                  cassette.filename().string() + ": line " + std::to_string(line) +
                      " lacks fingerprint/response",
                  {{"line", line}});
    }
    responses_[r["fingerprint"].get<std::string>()] = r["response"].get<std::string>();
  }
}

std::string ReplayBackend::generate(const PromptRequest& request) {
  const std::string fp = request.fingerprint();
  auto it = responses_.find(fp);
  if (it == responses_.end()) {
    throw Error(ErrorCode::CassetteMiss, "no cassette entry for request " + fp,
                {{"fingerprint", fp}});
  }
  return it->second;
}

std::shared_ptr<Backend> record_replay(std::shared_ptr<Backend> live, CassetteMode mode,
                                       const fs::path& cassette) {
  if (mode == CassetteMode::Record) {
    if (!live) throw Error(ErrorCode::InvalidConfig, "recording needs a live backend");
    return std::make_shared<RecordingBackend>(std::move(live), cassette);
  }
  return std::make_shared<ReplayBackend>(cassette);
}

}  // namespace persona_lab::gateway
