#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace persona_lab {

// Every failure the library raises carries one of these codes. The string
// tokens returned by error_token() are part of the HTTP API and are frozen.
enum class ErrorCode {
  // interview-engine
  InvalidAlias,
  DuplicateAlias,
  InvalidConfig,
  MalformedModelOutput,
  UnknownQuestion,
  AlreadyAnswered,
  EmptyAnswer,
  WrongStage,
  StageTooEarly,
  // model-gateway
  BackendFailure,
  TransportError,
  AuthFailure,
  Timeout,
  InvalidRequest,
  CassetteMiss,
  CassetteCorrupt,
  FingerprintCollision,
  // persona-assessments
  InvalidKey,
  OutOfRangeItem,
  BatteryShapeError,
  InvalidMbti,
  InvalidAnswer,
  IncompleteSet,
  // simulation-runner
  InvalidPredictedAnswer,
  RunAborted,
  // metrics-lab
  EmptyInput,
  DuplicateCandidates,
  DimensionMismatch,
  QtypeMismatch,
  OutOfScale,
  TooFewParticipants,
  UnknownItem,
  MissingAlignment,
  // reasoning-audit
  MissingGold,
  GridMismatch,
  SubsetTooSmall,
  NoOverlap,
  // session-store
  SeqConflict,
  LockNotHeld,
  IoFailure,
  CorruptLog,
  UnknownSession,
  ManifestMissing,
  HashMismatch,
  DuplicateRecord,
  // service-api
  Unauthorized,
  NotFound,
  NotReady,
};

std::string_view error_token(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr);

  ErrorCode code() const noexcept { return code_; }
  std::string_view token() const noexcept { return error_token(code_); }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace persona_lab
