#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace persona_lab::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

// Runs of ASCII whitespace become a single space; leading/trailing removed.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

// Lower-cased letters and digits only, words separated by one space.
// "Coping / Constraint" -> "coping constraint".
std::string normalize_label(std::string_view s);

}  // namespace persona_lab::text
