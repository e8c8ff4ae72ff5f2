#include "persona_lab/assessments/mbti.hpp"

#include <algorithm>
#include <regex>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/text.hpp"

namespace persona_lab::assessments {

namespace {
constexpr std::string_view kAxes[4] = {"IE", "NS", "TF", "JP"};
}

bool MbtiReport::contains(std::string_view code) const {
  return std::find(types.begin(), types.end(), code) != types.end();
}

bool is_valid_mbti(std::string_view code) noexcept {
  if (code.size() != 4) return false;
  for (int i = 0; i < 4; ++i) {
    if (kAxes[i].find(code[i]) == std::string_view::npos) return false;
  }
  return true;
}

std::string normalize_mbti(std::string_view code) {
  std::string up = text::to_upper(text::trim(code));
  if (!is_valid_mbti(up)) {
    throw Error(ErrorCode::InvalidMbti, "'" + std::string(code) + "' is not an MBTI type",
                {{"code", std::string(code)}});
  }
  return up;
}

MbtiReport parse_mbti(std::string_view raw) {
  static const std::regex separators(R"(\s*(?:/|,|;|\||\bor\b|\s)\s*)", std::regex::icase);
  const std::string s = text::trim(raw);
  std::vector<std::string> parts;
  for (auto it = std::sregex_token_iterator(s.begin(), s.end(), separators, -1);
       it != std::sregex_token_iterator(); ++it) {
    if (!it->str().empty()) parts.push_back(it->str());
  }
  if (parts.empty() || parts.size() > 2) {
    throw Error(ErrorCode::InvalidMbti, "expected one or two MBTI types in '" + s + "'",
                {{"raw", s}});
  }
  MbtiReport r;
  for (const auto& p : parts) r.types.push_back(normalize_mbti(p));
  std::sort(r.types.begin(), r.types.end());
  r.types.erase(std::unique(r.types.begin(), r.types.end()), r.types.end());
  return r;
}

std::string format_mbti(const MbtiReport& report) { return text::join(report.types, " / "); }

int mbti_hamming(std::string_view a, std::string_view b) {
  const std::string x = normalize_mbti(a);
  const std::string y = normalize_mbti(b);
  int d = 0;
  for (int i = 0; i < 4; ++i) d += x[i] != y[i];
  return d;
}

}  // namespace persona_lab::assessments
