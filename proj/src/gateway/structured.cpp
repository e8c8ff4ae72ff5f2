#include "persona_lab/gateway/structured.hpp"

#include <cctype>

#include "persona_lab/common/text.hpp"

namespace persona_lab::gateway {

namespace {

// Strips bullets and emphasis from the start of a line: "- **EVIDENCE**:" -> "EVIDENCE**:".
std::string_view strip_decoration(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '-' ||
                             line[i] == '*' || line[i] == '#' || line[i] == '>' || line[i] == '_')) {
    ++i;
  }
  return line.substr(i);
}

// If `line` opens a field in `shape`, returns its index and the value remainder.
std::optional<std::pair<std::size_t, std::string>> match_label(std::string_view line,
                                                               const RecordShape& shape) {
  std::string_view body = strip_decoration(line);
  for (std::size_t f = 0; f < shape.fields.size(); ++f) {
    const auto& label = shape.fields[f].label;
    if (!text::istarts_with(body, label)) continue;
    std::string_view rest = body.substr(label.size());
    std::size_t j = 0;
    while (j < rest.size() && (rest[j] == '*' || rest[j] == '_' || rest[j] == ' ')) ++j;
    if (j < rest.size() && rest[j] == ':') {
      std::string_view value = rest.substr(j + 1);
      std::size_t k = 0;
      while (k < value.size() && (value[k] == '*' || value[k] == '_')) ++k;
      return std::make_pair(f, text::trim(value.substr(k)));
    }
  }
  return std::nullopt;
}

Error malformed(const std::string& why, std::string_view raw) {
  return Error(ErrorCode::MalformedModelOutput, why, {{"raw", std::string(raw)}});
}

std::string repair_message(const std::string& problem, const RecordShape& shape) {
  std::string labels;
  for (const auto& f : shape.fields) {
    if (!labels.empty()) labels += ", ";
    labels += f.label;
  }
  return "Your previous reply could not be used: " + problem +
         "\nReply again with every field on its own line as LABEL: value, using exactly these "
         "labels: " +
         labels + ".";
}

}  // namespace

StructuredRecord parse_labeled(std::string_view raw, const RecordShape& shape) {
  std::vector<std::optional<std::string>> values(shape.fields.size());
  std::optional<std::size_t> current;
  for (const auto& line : text::split_lines(raw)) {
    if (auto hit = match_label(line, shape)) {
      current = hit->first;
      if (!values[*current]) values[*current] = hit->second;
      else current.reset();  // first occurrence wins
      continue;
    }
    if (current) {
      auto& v = *values[*current];
      std::string t = text::trim(line);
      if (t.empty()) continue;
      if (!v.empty()) v.push_back('\n');
      v += t;
    }
  }

  StructuredRecord out;
  for (std::size_t f = 0; f < shape.fields.size(); ++f) {
    const auto& spec = shape.fields[f];
    if (!values[f]) throw malformed("missing field " + spec.label, raw);
    std::string value = text::trim(*values[f]);
    if (value.empty() && !spec.allow_empty) throw malformed("empty field " + spec.label, raw);
    switch (spec.kind) {
      case FieldKind::Text:
        break;
      case FieldKind::Enum: {
        auto resolved = resolve_alias(spec.aliases, value);
        if (!resolved) {
          throw malformed("unrecognized value '" + value + "' for field " + spec.label, raw);
        }
        value = *resolved;
        break;
      }
      case FieldKind::OneOf: {
        bool ok = false;
        for (const auto& opt : spec.options) {
          if (text::iequals(opt, value)) {
            value = opt;
            ok = true;
            break;
          }
        }
        if (!ok) throw malformed("value '" + value + "' not allowed for field " + spec.label, raw);
        break;
      }
    }
    out[spec.label] = std::move(value);
  }
  return out;
}

StructuredRecord complete_structured(ModelGateway& gateway, const PromptRequest& request,
                                     const RecordShape& shape, const StructuredOptions& options,
                                     std::string* prompt_fingerprint) {
  if (prompt_fingerprint) *prompt_fingerprint = request.fingerprint();
  PromptRequest current = request;
  for (int round = 0;; ++round) {
    Completion c = gateway.complete(current);
    std::string problem;
    ErrorCode code = ErrorCode::MalformedModelOutput;
    try {
      StructuredRecord rec = parse_labeled(c.text, shape);
      if (options.validator) {
        if (auto why = options.validator(rec)) {
          problem = *why;
          code = options.validation_error;
        } else {
          return rec;
        }
      } else {
        return rec;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedModelOutput) throw;
      problem = e.what();
    }
    if (round >= 1) {
      throw Error(code, "model output unusable after repair: " + problem, {{"raw", c.text}});
    }
    current.messages.push_back({Role::Assistant, c.text});
    current.messages.push_back({Role::User, repair_message(problem, shape)});
  }
}

const std::map<std::string, std::string>& reasoning_category_aliases() {
  static const std::map<std::string, std::string> table = {
      {"narrativereference", "NarrativeReference"},
      {"narrative reference", "NarrativeReference"},
      {"narrative", "NarrativeReference"},
      {"narrative based", "NarrativeReference"},
      {"valueabstraction", "ValueAbstraction"},
      {"value abstraction", "ValueAbstraction"},
      {"value based", "ValueAbstraction"},
      {"value", "ValueAbstraction"},
      {"copingconstraint", "CopingConstraint"},
      {"coping constraint", "CopingConstraint"},
      {"constraint based", "CopingConstraint"},
      {"constraint", "CopingConstraint"},
      {"coping", "CopingConstraint"},
      {"genericnorm", "GenericNorm"},
      {"generic norm", "GenericNorm"},
      {"generic norm fallback", "GenericNorm"},
      {"generic", "GenericNorm"},
      {"fallback", "GenericNorm"},
  };
  return table;
}

const std::map<std::string, std::string>& evidence_location_aliases() {
  static const std::map<std::string, std::string> table = {
      {"coreinterview", "CoreInterview"},
      {"core interview", "CoreInterview"},
      {"core", "CoreInterview"},
      {"core 10", "CoreInterview"},
      {"core only", "CoreInterview"},
      {"followup", "FollowUp"},
      {"follow up", "FollowUp"},
      {"follow ups", "FollowUp"},
      {"follow up only", "FollowUp"},
      {"both", "Both"},
      {"core and follow up", "Both"},
      {"unclassified", "Unclassified"},
      {"none", "Unclassified"},
      {"n a", "Unclassified"},
  };
  return table;
}

std::optional<std::string> resolve_alias(const std::map<std::string, std::string>& table,
                                         std::string_view surface) {
  auto it = table.find(text::normalize_label(surface));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace persona_lab::gateway
