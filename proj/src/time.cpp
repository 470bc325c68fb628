#include "immpc/time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace immpc {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw std::invalid_argument("truncated timestamp");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("non-digit in timestamp");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw std::invalid_argument(std::string("expected '") + c + "' in timestamp");
}

}  // namespace

UtcTime parse_iso8601(std::string_view s) {
  try {
    const int year = digits(s, 0, 4);
    expect(s, 4, '-');
    const int month = digits(s, 5, 2);
    expect(s, 7, '-');
    const int day = digits(s, 8, 2);
    if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' '))
      throw std::invalid_argument("expected 'T' in timestamp");
    const int hh = digits(s, 11, 2);
    expect(s, 13, ':');
    const int mm = digits(s, 14, 2);
    expect(s, 16, ':');
    const int ss = digits(s, 17, 2);
    std::size_t pos = 19;
    int millis = 0;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      int scale = 100;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (scale > 0) millis += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
      if (pos == start) throw std::invalid_argument("empty fraction in timestamp");
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters in timestamp");
    if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60)
      throw std::invalid_argument("timestamp field out of range");
    const std::int64_t days =
        days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    const std::int64_t secs = days * 86400 + hh * 3600 + mm * 60 + ss;
    return UtcTime{secs * 1000 + millis};
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + ": '" + std::string(s) + "'");
  }
}

std::string format_iso8601(UtcTime t) {
  std::int64_t ms = t.ms;
  std::int64_t days = ms >= 0 ? ms / 86400000 : -((-ms + 86399999) / 86400000);
  std::int64_t rem = ms - days * 86400000;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  const auto hh = static_cast<int>(rem / 3600000);
  rem %= 3600000;
  const auto mi = static_cast<int>(rem / 60000);
  rem %= 60000;
  const auto sec = static_cast<int>(rem / 1000);
  const auto milli = static_cast<int>(rem % 1000);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<long long>(y), m, d, hh, mi, sec, milli);
  return buf;
}

UtcTime add_seconds(UtcTime t, double seconds) {
  return UtcTime{t.ms + static_cast<std::int64_t>(std::llround(seconds * 1000.0))};
}

double julian_date(UtcTime t) {
  return 2440587.5 + static_cast<double>(t.ms) / 86400000.0;
}

}  // namespace immpc
