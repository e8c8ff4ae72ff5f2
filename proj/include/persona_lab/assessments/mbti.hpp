#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace persona_lab::assessments {

// One or two self-reported types, kept sorted and unique.
struct MbtiReport {
  std::vector<std::string> types;

  bool contains(std::string_view code) const;
  bool operator==(const MbtiReport&) const = default;
};

bool is_valid_mbti(std::string_view code) noexcept;

// Accepts "INFP", "enfp / infp", "ENFP or INFP", "ENFP,INFP". Throws
// Error(InvalidMbti).
MbtiReport parse_mbti(std::string_view raw);

// Single code, upper-cased. Throws Error(InvalidMbti).
std::string normalize_mbti(std::string_view code);

// "ENFP / INFP".
std::string format_mbti(const MbtiReport& report);

// Number of differing letters between two valid codes (0..4).
int mbti_hamming(std::string_view a, std::string_view b);

}  // namespace persona_lab::assessments
