#pragma once

// Canonical line-delimited record files. Every file starts with a header line
// "persona-lab/v1 <record-kind>" followed by one canonical JSON document per
// line (UTF-8, keys sorted, no insignificant whitespace, '\n'-terminated).

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "persona_lab/common/error.hpp"

namespace persona_lab {

using json = nlohmann::json;

inline constexpr std::string_view kFormatVersion = "persona-lab/v1";

std::string header_line(std::string_view kind);

// Throws Error(InvalidRequest) on invalid UTF-8.
std::string canonical(const json& value);

struct RecordFile {
  std::string kind;
  std::vector<json> records;
};

// `corrupt_code` is raised (with details {"line": n}) for malformed lines or a
// wrong header; missing files raise IoFailure.
RecordFile read_record_file(const std::filesystem::path& path, std::string_view expected_kind,
                            ErrorCode corrupt_code = ErrorCode::CorruptLog);

// Rewrites the whole file atomically (temp file + rename).
void write_record_file(const std::filesystem::path& path, std::string_view kind,
                       const std::vector<json>& records);

// Appends one record line, writing the header first if the file is new.
void append_record(const std::filesystem::path& path, std::string_view kind, const json& record,
                   bool durable);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace persona_lab
