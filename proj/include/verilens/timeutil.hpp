#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "verilens/core.hpp"

namespace verilens {

using Timestamp = std::chrono::sys_seconds;

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Parses ISO-8601 UTC timestamps: "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.fff](Z|+00:00)".
// Fractional seconds are truncated. Non-UTC offsets are applied.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, sec = 0;
  if (s.size() < 10) return std::nullopt;
  const std::string buf(s);
  int consumed = 0;
  if (std::sscanf(buf.c_str(), "%4d-%2u-%2u%n", &y, &mo, &d, &consumed) != 3 || consumed != 10)
    return std::nullopt;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  std::size_t pos = 10;
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
    ++pos;
    int n = 0;
    if (std::sscanf(buf.c_str() + pos, "%2d:%2d:%2d%n", &h, &mi, &sec, &n) != 3 || n != 8)
      return std::nullopt;
    if (h > 23 || mi > 59 || sec > 60 || h < 0 || mi < 0 || sec < 0) return std::nullopt;
    pos += 8;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      const std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) return std::nullopt;
    }
    if (pos == s.size()) return std::nullopt;  // zone designator required
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh = 0, om = 0;
      if (std::sscanf(buf.c_str() + pos + 1, "%2d:%2d%n", &oh, &om, &n) != 2 || n != 5)
        return std::nullopt;
      offset = (s[pos] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
      pos += 6;
    } else {
      return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;
  }
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{sec} - seconds{offset};
}

inline Timestamp require_timestamp(std::string_view s, std::string_view what) {
  auto t = parse_timestamp(s);
  if (!t) throw DataError("invalid timestamp for " + std::string(what) + ": '" + std::string(s) + "'");
  return *t;
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  const hh_mm_ss hms{t - days};
  char out[32];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return out;
}

inline std::int64_t seconds_between(Timestamp from, Timestamp to) {
  return (to - from).count();
}

inline double days_between(Timestamp from, Timestamp to) {
  return static_cast<double>(seconds_between(from, to)) / static_cast<double>(kSecondsPerDay);
}

}  // namespace verilens
