#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace pvmeta {

// All timestamps are UTC, seconds since the Unix epoch. No leap seconds, no
// local time anywhere in the library.
using UnixTime = std::int64_t;

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// days_from_civil / civil_from_days follow the well-known proleptic-Gregorian
// day-count algorithms (era/day-of-era form).
constexpr std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

constexpr UnixTime to_unix(const CivilDate& cd, int hour = 0, int minute = 0, int second = 0) {
  return days_from_civil(cd.year, cd.month, cd.day) * 86400 + hour * 3600 + minute * 60 + second;
}

inline CivilDate date_of(UnixTime t) {
  std::int64_t days = t / 86400;
  if (t < 0 && t % 86400 != 0) --days;
  return civil_from_days(days);
}

inline int second_of_day(UnixTime t) {
  std::int64_t s = t % 86400;
  if (s < 0) s += 86400;
  return static_cast<int>(s);
}

inline double hour_of_day(UnixTime t) { return second_of_day(t) / 3600.0; }

inline int day_of_year(const CivilDate& cd) {
  return static_cast<int>(days_from_civil(cd.year, cd.month, cd.day) -
                          days_from_civil(cd.year, 1, 1)) + 1;
}

inline bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// ISO-8601 weekday, Monday=1..Sunday=7.
inline int iso_weekday(const CivilDate& cd) {
  const std::int64_t z = days_from_civil(cd.year, cd.month, cd.day);
  // 1970-01-01 was a Thursday (=4).
  std::int64_t wd = (z + 3) % 7;
  if (wd < 0) wd += 7;
  return static_cast<int>(wd) + 1;
}

struct IsoWeek {
  int year = 0;  // ISO week-based year, may differ from the civil year
  int week = 0;  // 1..53

  friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;
};

inline IsoWeek iso_week(const CivilDate& cd) {
  // The ISO week of a date is the week containing its nearest Thursday.
  const std::int64_t z = days_from_civil(cd.year, cd.month, cd.day);
  const std::int64_t thursday = z - iso_weekday(cd) + 4;
  const CivilDate th = civil_from_days(thursday);
  const std::int64_t jan1 = days_from_civil(th.year, 1, 1);
  const int week = static_cast<int>((thursday - jan1) / 7) + 1;
  return IsoWeek{th.year, week};
}

namespace detail {

// Reads exactly `width` ASCII digits starting at `pos`; rejects signs,
// spaces, and anything shorter, so padded fields stay mandatory.
inline bool fixed_digits(std::string_view s, size_t pos, size_t width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (size_t i = 0; i < width; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

// Parses strictly zero-padded "YYYY-MM-DD"; anything looser is rejected.
inline std::optional<CivilDate> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::fixed_digits(s, 0, 4, y) || !detail::fixed_digits(s, 5, 2, m) ||
      !detail::fixed_digits(s, 8, 2, d))
    return std::nullopt;
  const CivilDate cd{y, m, d};
  if (m < 1 || m > 12 || d < 1) return std::nullopt;
  if (civil_from_days(days_from_civil(y, m, d)) != cd) return std::nullopt;
  return cd;
}

// Parses ISO-8601 UTC instants "YYYY-MM-DDTHH:MM:SS" with an optional
// trailing "Z". Fields must be zero-padded and the separator must be 'T';
// offsets other than Z are rejected.
inline std::optional<UnixTime> parse_timestamp(std::string_view s) {
  if (s.size() == 20) {
    if (s.back() != 'Z') return std::nullopt;
    s.remove_suffix(1);
  }
  if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') return std::nullopt;
  const auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  int h = 0, mi = 0, sec = 0;
  if (!detail::fixed_digits(s, 11, 2, h) || !detail::fixed_digits(s, 14, 2, mi) ||
      !detail::fixed_digits(s, 17, 2, sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return to_unix(*date, h, mi, sec);
}

inline std::string format_date(const CivilDate& cd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", cd.year, cd.month, cd.day);
  return buf;
}

inline std::string format_timestamp(UnixTime t) {
  const CivilDate cd = date_of(t);
  const int s = second_of_day(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", cd.year, cd.month, cd.day,
                s / 3600, (s % 3600) / 60, s % 60);
  return buf;
}

}  // namespace pvmeta
