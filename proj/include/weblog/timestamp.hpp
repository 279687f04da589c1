#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace weblog {

// A log timestamp normalized to UTC. The zone offset the server logged with
// is kept so lines can be rendered back exactly as they appeared.
struct Timestamp {
  std::int64_t utc_epoch_seconds = 0;
  int original_offset_minutes = 0;

  bool operator==(const Timestamp &) const = default;
};

namespace detail {

inline constexpr const char *kMonthNames[12] = {"Jan", "Feb", "Mar", "Apr",
                                                "May", "Jun", "Jul", "Aug",
                                                "Sep", "Oct", "Nov", "Dec"};

inline int month_from_name(std::string_view name) {
  for (int i = 0; i < 12; ++i) {
    if (name.size() == 3 && (name[0] == kMonthNames[i][0] || name[0] == kMonthNames[i][0] + 32) &&
        (name[1] | 32) == (kMonthNames[i][1] | 32) && (name[2] | 32) == (kMonthNames[i][2] | 32))
      return i + 1;
  }
  return 0;
}

struct CivilTime {
  int year, month, day, hour, minute, second;
};

inline std::int64_t civil_to_epoch(const CivilTime &c) {
  using namespace std::chrono;
  const sys_days d = year_month_day{year{c.year}, month{unsigned(c.month)}, day{unsigned(c.day)}};
  return duration_cast<seconds>(d.time_since_epoch()).count() + c.hour * 3600 + c.minute * 60 +
         c.second;
}

inline CivilTime epoch_to_civil(std::int64_t epoch) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch}};
  const sys_days d = floor<days>(tp);
  const year_month_day ymd{d};
  const hh_mm_ss tod{tp - d};
  return CivilTime{int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day())),
                   int(tod.hours().count()), int(tod.minutes().count()),
                   int(tod.seconds().count())};
}

inline bool valid_civil_date(int year, int month, int day) {
  using namespace std::chrono;
  return year_month_day{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                        std::chrono::day{unsigned(day)}}
      .ok();
}

} // namespace detail

// Renders "dd/Mon/yyyy:HH:MM:SS +zzzz" in the timestamp's own zone offset.
inline std::string format_log_time(const Timestamp &t) {
  const auto c = detail::epoch_to_civil(t.utc_epoch_seconds + std::int64_t(t.original_offset_minutes) * 60);
  const int off = t.original_offset_minutes;
  const int abs_off = off < 0 ? -off : off;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%02d/%s/%04d:%02d:%02d:%02d %c%02d%02d", c.day,
                detail::kMonthNames[c.month - 1], c.year, c.hour, c.minute, c.second,
                off < 0 ? '-' : '+', abs_off / 60, abs_off % 60);
  return buf;
}

// "YYYY-MM-DDTHH:MM:SSZ", always UTC
inline std::string format_iso8601(std::int64_t utc_epoch_seconds) {
  const auto c = detail::epoch_to_civil(utc_epoch_seconds);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  return buf;
}

// "YYYY-MM-DD HH:MM:SS", always UTC
inline std::string format_datetime(std::int64_t utc_epoch_seconds) {
  const auto c = detail::epoch_to_civil(utc_epoch_seconds);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", c.year, c.month, c.day, c.hour,
                c.minute, c.second);
  return buf;
}

// Parses "dd/Mon/yyyy:HH:MM:SS +zzzz" (the only layout accepted). The result
// is zone-normalized: wall-clock time minus the offset.
inline std::optional<Timestamp> parse_log_time(std::string_view s) {
  static constexpr int kLen = 26;
  if (s.size() != kLen)
    return std::nullopt;
  const auto digit = [&](int i) { return s[i] >= '0' && s[i] <= '9'; };
  const auto num2 = [&](int i) { return (s[i] - '0') * 10 + (s[i + 1] - '0'); };
  for (int i : {0, 1, 7, 8, 9, 10, 12, 13, 15, 16, 18, 19, 22, 23, 24, 25})
    if (!digit(i))
      return std::nullopt;
  if (s[2] != '/' || s[6] != '/' || s[11] != ':' || s[14] != ':' || s[17] != ':' || s[20] != ' ')
    return std::nullopt;
  if (s[21] != '+' && s[21] != '-')
    return std::nullopt;

  const int day = num2(0);
  const int month = detail::month_from_name(s.substr(3, 3));
  const int year = num2(7) * 100 + num2(9);
  const int hour = num2(12), minute = num2(15), second = num2(18);
  const int off_h = num2(22), off_m = num2(24);
  if (month == 0 || hour > 23 || minute > 59 || second > 59 || off_h > 14 || off_m > 59)
    return std::nullopt;
  if (!detail::valid_civil_date(year, month, day))
    return std::nullopt;
  int offset = off_h * 60 + off_m;
  if (s[21] == '-')
    offset = -offset;
  if (offset < -14 * 60 || offset > 14 * 60)
    return std::nullopt;

  Timestamp t;
  t.original_offset_minutes = offset;
  t.utc_epoch_seconds =
      detail::civil_to_epoch({year, month, day, hour, minute, second}) - std::int64_t(offset) * 60;
  return t;
}

// Convenience for fixtures: UTC civil time -> Timestamp with +0000 offset.
inline Timestamp utc_timestamp(int year, int month, int day, int hour, int minute, int second) {
  return Timestamp{detail::civil_to_epoch({year, month, day, hour, minute, second}), 0};
}

} // namespace weblog
