#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace immpc {

// UTC instant with millisecond resolution (milliseconds since 1970-01-01).
struct UtcTime {
  std::int64_t ms = 0;

  friend auto operator<=>(const UtcTime&, const UtcTime&) = default;
};

// Accepts YYYY-MM-DDTHH:MM:SS[.fff]Z (the trailing Z is optional).
// Throws std::invalid_argument on malformed input.
UtcTime parse_iso8601(std::string_view text);

// Always emits YYYY-MM-DDTHH:MM:SS.fffZ.
std::string format_iso8601(UtcTime t);

inline double hours_between(UtcTime from, UtcTime to) {
  return static_cast<double>(to.ms - from.ms) / 3.6e6;
}

UtcTime add_seconds(UtcTime t, double seconds);

inline UtcTime add_hours(UtcTime t, double hours) {
  return add_seconds(t, hours * 3600.0);
}

double julian_date(UtcTime t);

}  // namespace immpc
