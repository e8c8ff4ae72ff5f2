#include "persona_lab/common/clock.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "persona_lab/common/error.hpp"

namespace persona_lab {

Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

Clock fixed_clock(TimePoint at) {
  return [at] { return at; };
}

Clock clock_from_env() {
  if (const char* fixed = std::getenv("PERSONA_LAB_FIXED_CLOCK"); fixed && *fixed) {
    return fixed_clock(parse_rfc3339(fixed));
  }
  return system_clock();
}

std::string to_rfc3339(TimePoint t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TimePoint parse_rfc3339(std::string_view s) {
  std::tm tm{};
  int consumed = 0;
  std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed) != 6 ||
      static_cast<std::size_t>(consumed) != str.size()) {
    throw Error(ErrorCode::InvalidConfig, "not an RFC 3339 UTC timestamp: " + str);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return std::chrono::system_clock::from_time_t(timegm(&tm));
}

}  // namespace persona_lab
