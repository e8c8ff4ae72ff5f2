#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace persona_lab {

using TimePoint = std::chrono::system_clock::time_point;
using Clock = std::function<TimePoint()>;

Clock system_clock();
Clock fixed_clock(TimePoint at);

// PERSONA_LAB_FIXED_CLOCK=<RFC 3339 UTC> pins every timestamp; otherwise the
// system clock is used.
Clock clock_from_env();

// "2026-01-01T00:00:00Z" (second resolution, always UTC).
std::string to_rfc3339(TimePoint t);
TimePoint parse_rfc3339(std::string_view s);

}  // namespace persona_lab
