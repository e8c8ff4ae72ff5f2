#include "persona_lab/common/error.hpp"

namespace persona_lab {

std::string_view error_token(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidAlias: return "INVALID_ALIAS";
    case ErrorCode::DuplicateAlias: return "DUPLICATE_ALIAS";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::MalformedModelOutput: return "MALFORMED_MODEL_OUTPUT";
    case ErrorCode::UnknownQuestion: return "UNKNOWN_QUESTION";
    case ErrorCode::AlreadyAnswered: return "ALREADY_ANSWERED";
    case ErrorCode::EmptyAnswer: return "EMPTY_ANSWER";
    case ErrorCode::WrongStage: return "WRONG_STAGE";
    case ErrorCode::StageTooEarly: return "STAGE_TOO_EARLY";
    case ErrorCode::BackendFailure: return "BACKEND_FAILURE";
    case ErrorCode::TransportError: return "TRANSPORT_ERROR";
    case ErrorCode::AuthFailure: return "AUTH_FAILURE";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::InvalidRequest: return "INVALID_REQUEST";
    case ErrorCode::CassetteMiss: return "CASSETTE_MISS";
    case ErrorCode::CassetteCorrupt: return "CASSETTE_CORRUPT";
    case ErrorCode::FingerprintCollision: return "FINGERPRINT_COLLISION";
    case ErrorCode::InvalidKey: return "INVALID_KEY";
    case ErrorCode::OutOfRangeItem: return "OUT_OF_RANGE_ITEM";
    case ErrorCode::BatteryShapeError: return "BATTERY_SHAPE_ERROR";
    case ErrorCode::InvalidMbti: return "INVALID_MBTI";
    case ErrorCode::InvalidAnswer: return "INVALID_ANSWER";
    case ErrorCode::IncompleteSet: return "INCOMPLETE_SET";
    case ErrorCode::InvalidPredictedAnswer: return "INVALID_PREDICTED_ANSWER";
    case ErrorCode::RunAborted: return "RUN_ABORTED";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::DuplicateCandidates: return "DUPLICATE_CANDIDATES";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::QtypeMismatch: return "QTYPE_MISMATCH";
    case ErrorCode::OutOfScale: return "OUT_OF_SCALE";
    case ErrorCode::TooFewParticipants: return "TOO_FEW_PARTICIPANTS";
    case ErrorCode::UnknownItem: return "UNKNOWN_ITEM";
    case ErrorCode::MissingAlignment: return "MISSING_ALIGNMENT";
    case ErrorCode::MissingGold: return "MISSING_GOLD";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::SubsetTooSmall: return "SUBSET_TOO_SMALL";
    case ErrorCode::NoOverlap: return "NO_OVERLAP";
    case ErrorCode::SeqConflict: return "SEQ_CONFLICT";
    case ErrorCode::LockNotHeld: return "LOCK_NOT_HELD";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::CorruptLog: return "CORRUPT_LOG";
    case ErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case ErrorCode::ManifestMissing: return "MANIFEST_MISSING";
    case ErrorCode::HashMismatch: return "HASH_MISMATCH";
    case ErrorCode::DuplicateRecord: return "DUPLICATE_RECORD";
    case ErrorCode::Unauthorized: return "UNAUTHORIZED";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::NotReady: return "NOT_READY";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message, nlohmann::json details)
    : std::runtime_error(message), code_(code), details_(std::move(details)) {}

}  // namespace persona_lab
