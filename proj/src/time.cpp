#include "polarnet/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace polarnet {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw std::invalid_argument("truncated date/time field");
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw std::invalid_argument("non-digit in date/time field");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument(std::string("expected '") + c + "' at offset " +
                                std::to_string(pos));
  }
}

unsigned days_in_month(int year, unsigned month) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return month == 2 && leap ? 29 : kDays[month - 1];
}

std::int64_t parse_ymd(std::string_view text) {
  int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, '-');
  int m = parse_fixed(text, 5, 2);
  expect_char(text, 7, '-');
  int d = parse_fixed(text, 8, 2);
  if (m < 1 || m > 12) throw std::invalid_argument("month out of range");
  if (d < 1 || static_cast<unsigned>(d) > days_in_month(y, m)) {
    throw std::invalid_argument("day out of range");
  }
  return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  std::int64_t y = year - (month <= 2 ? 1 : 0);
  std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  auto yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  auto doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  unsigned d = doy - (153 * mp + 2) / 5 + 1;
  unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2 ? 1 : 0)), m, d};
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty timestamp");
  bool numeric = true;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!((c >= '0' && c <= '9') || (i == 0 && c == '-'))) {
      numeric = false;
      break;
    }
  }
  if (numeric) {
    Timestamp value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::invalid_argument("epoch seconds out of range");
    }
    return value;
  }

  std::int64_t days = parse_ymd(text);
  if (text.size() < 19) throw std::invalid_argument("timestamp missing time of day");
  if (text[10] != 'T' && text[10] != ' ') throw std::invalid_argument("expected 'T' separator");
  int hh = parse_fixed(text, 11, 2);
  expect_char(text, 13, ':');
  int mm = parse_fixed(text, 14, 2);
  expect_char(text, 16, ':');
  int ss = parse_fixed(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw std::invalid_argument("time of day out of range");

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    // Fractional seconds are truncated to second precision.
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  Timestamp offset = 0;
  std::string_view zone = text.substr(pos);
  if (zone == "Z" || zone.empty()) {
    offset = 0;
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int oh = parse_fixed(zone, 1, 2);
    int om = parse_fixed(zone, 4, 2);
    offset = (oh * 3600 + om * 60) * (zone[0] == '+' ? 1 : -1);
  } else {
    throw std::invalid_argument("unrecognised UTC offset '" + std::string(zone) + "'");
  }
  return days * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_timestamp(Timestamp ts) {
  std::int64_t days = floor_div(ts, kSecondsPerDay);
  std::int64_t secs = ts - days * kSecondsPerDay;
  CivilDate d = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", d.year, d.month, d.day,
                static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                static_cast<int>(secs % 60));
  return buf;
}

std::int64_t parse_date(std::string_view text) {
  if (text.size() != 10) throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  return parse_ymd(text);
}

std::string format_date(std::int64_t days) {
  CivilDate d = civil_from_days(days);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

Quarter Quarter::of(Timestamp ts) {
  CivilDate d = civil_from_days(floor_div(ts, kSecondsPerDay));
  return {d.year, static_cast<int>((d.month - 1) / 3 + 1)};
}

Quarter Quarter::parse(std::string_view text) {
  if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q')) {
    throw std::invalid_argument("expected quarter like 2014Q4, got '" + std::string(text) + "'");
  }
  int y = parse_fixed(text, 0, 4);
  int q = parse_fixed(text, 5, 1);
  if (q < 1 || q > 4) throw std::invalid_argument("quarter must be 1-4");
  return {y, q};
}

TimeWindow Quarter::window() const {
  auto first_month = static_cast<unsigned>((q - 1) * 3 + 1);
  Quarter n = next();
  auto next_month = static_cast<unsigned>((n.q - 1) * 3 + 1);
  return {days_from_civil(year, first_month, 1) * kSecondsPerDay,
          days_from_civil(n.year, next_month, 1) * kSecondsPerDay};
}

std::string Quarter::to_string() const { return std::to_string(year) + "Q" + std::to_string(q); }

CalendarWindow parse_calendar_window(std::string_view text) {
  if (text == "year") return CalendarWindow::year;
  if (text == "month") return CalendarWindow::month;
  if (text == "week") return CalendarWindow::week;
  throw std::invalid_argument("window must be year, month or week");
}

std::int64_t calendar_window_key(Timestamp ts, CalendarWindow window) {
  std::int64_t days = floor_div(ts, kSecondsPerDay);
  CivilDate d = civil_from_days(days);
  std::int64_t month_key = static_cast<std::int64_t>(d.year) * 12 + (d.month - 1);
  switch (window) {
    case CalendarWindow::year:
      return d.year;
    case CalendarWindow::month:
      return month_key;
    case CalendarWindow::week: {
      // 1970-01-05 was a Monday; ISO weeks start on Monday.
      std::int64_t week_index = floor_div(days - 4, 7);
      return week_index * 2048 + (month_key & 2047);
    }
  }
  return 0;
}

}  // namespace polarnet
