#pragma once

#include <string_view>

namespace persona_lab {

// Participant aliases are the only identifiers the system stores: "P" followed
// by exactly two digits.
bool is_valid_alias(std::string_view alias) noexcept;

// Throws Error(InvalidAlias).
void require_valid_alias(std::string_view alias);

}  // namespace persona_lab
