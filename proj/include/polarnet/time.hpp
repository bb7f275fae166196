#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace polarnet {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

constexpr Timestamp kSecondsPerDay = 86400;

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

CivilDate civil_from_days(std::int64_t days);

/// Accepts `YYYY-MM-DDTHH:MM:SS` followed by `Z` or a `+HH:MM`/`-HH:MM` offset,
/// or a plain integer of epoch seconds. Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Canonical UTC form `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp ts);

/// Parses `YYYY-MM-DD` into days since epoch.
std::int64_t parse_date(std::string_view text);
std::string format_date(std::int64_t days);

/// Half-open interval [begin, end) of timestamps.
struct TimeWindow {
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp ts) const { return ts >= begin && ts < end; }

  /// Whole days from `first` through `last`, both inclusive.
  static TimeWindow from_dates(std::int64_t first_day, std::int64_t last_day) {
    return {first_day * kSecondsPerDay, (last_day + 1) * kSecondsPerDay};
  }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Calendar quarter, Q1 = Jan-Mar.
struct Quarter {
  int year = 1970;
  int q = 1;

  static Quarter of(Timestamp ts);
  /// Parses `2014Q4`.
  static Quarter parse(std::string_view text);

  Quarter next() const { return q == 4 ? Quarter{year + 1, 1} : Quarter{year, q + 1}; }
  TimeWindow window() const;
  std::string to_string() const;

  friend auto operator<=>(const Quarter&, const Quarter&) = default;
};

/// Calendar windows used for exposure analysis. Weeks are ISO weeks clipped at
/// month boundaries so that every week window nests inside one month.
enum class CalendarWindow { year, month, week };

CalendarWindow parse_calendar_window(std::string_view text);

/// Opaque key identifying the calendar window containing `ts`.
std::int64_t calendar_window_key(Timestamp ts, CalendarWindow window);

}  // namespace polarnet
