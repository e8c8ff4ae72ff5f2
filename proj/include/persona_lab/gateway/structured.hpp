#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/backend.hpp"

namespace persona_lab::gateway {

enum class FieldKind {
  Text,   // free text
  Enum,   // normalized through `aliases` to a canonical token
  OneOf,  // must equal one of `options` (case-insensitive)
};

struct FieldSpec {
  std::string label;  // e.g. "EVIDENCE"
  FieldKind kind = FieldKind::Text;
  bool allow_empty = false;
  std::vector<std::string> options;
  // normalize_label(surface form) -> canonical token
  std::map<std::string, std::string> aliases;
};

struct RecordShape {
  std::vector<FieldSpec> fields;
};

using StructuredRecord = std::map<std::string, std::string>;

// Parses "LABEL: value" blocks. A value runs until the next known label; the
// label may be decorated with markdown emphasis or list bullets. Throws
// Error(MalformedModelOutput) naming the first missing or invalid field.
StructuredRecord parse_labeled(std::string_view raw, const RecordShape& shape);

// Returns an error message when the parsed record is semantically unusable.
using RecordValidator = std::function<std::optional<std::string>(const StructuredRecord&)>;

struct StructuredOptions {
  RecordValidator validator;
  ErrorCode validation_error = ErrorCode::MalformedModelOutput;
};

// Completes, parses, and on failure performs one repair round-trip that
// appends the model's reply and the parse error. A second failure raises
// MalformedModelOutput (or options.validation_error when only the validator
// rejected) with the raw text in details["raw"].
StructuredRecord complete_structured(ModelGateway& gateway, const PromptRequest& request,
                                     const RecordShape& shape, const StructuredOptions& options = {},
                                     std::string* prompt_fingerprint = nullptr);

// Surface labels used in traces and annotation sheets, mapped to canonical
// enum tokens ("value-based" -> "ValueAbstraction").
const std::map<std::string, std::string>& reasoning_category_aliases();
const std::map<std::string, std::string>& evidence_location_aliases();

// Looks up normalize_label(surface) in the table.
std::optional<std::string> resolve_alias(const std::map<std::string, std::string>& table,
                                         std::string_view surface);

}  // namespace persona_lab::gateway
