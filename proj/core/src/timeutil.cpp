#include "canopy/timeutil.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "canopy/error.hpp"

namespace canopy {

namespace {

int parse_digits(std::string_view s, std::size_t pos, std::size_t count, std::string_view whole) {
  if (pos + count > s.size()) throw Error("malformed timestamp '" + std::string(whole) + "'");
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + count, value);
  if (ec != std::errc() || ptr != s.data() + pos + count)
    throw Error("malformed timestamp '" + std::string(whole) + "'");
  return value;
}

void expect_char(std::string_view s, std::size_t pos, char c, std::string_view whole) {
  if (pos >= s.size() || s[pos] != c) throw Error("malformed timestamp '" + std::string(whole) + "'");
}

std::chrono::sys_days make_day(int y, int m, int d, std::string_view whole) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error("invalid calendar date '" + std::string(whole) + "'");
  return std::chrono::sys_days{ymd};
}

}  // namespace

std::chrono::sys_days parse_date(std::string_view text) {
  expect_char(text, 4, '-', text);
  expect_char(text, 7, '-', text);
  if (text.size() != 10) throw Error("malformed date '" + std::string(text) + "'");
  return make_day(parse_digits(text, 0, 4, text), parse_digits(text, 5, 2, text), parse_digits(text, 8, 2, text),
                  text);
}

Instant parse_instant(std::string_view text) {
  if (text.size() < 16) throw Error("malformed timestamp '" + std::string(text) + "'");
  const auto day = parse_date(text.substr(0, 10));
  if (text[10] != 'T' && text[10] != ' ') throw Error("malformed timestamp '" + std::string(text) + "'");
  const int hh = parse_digits(text, 11, 2, text);
  expect_char(text, 13, ':', text);
  const int mm = parse_digits(text, 14, 2, text);
  std::size_t pos = 16;
  int ss = 0;
  if (pos < text.size() && text[pos] == ':') {
    ss = parse_digits(text, pos + 1, 2, text);
    pos += 3;
  }
  if (hh > 23 || mm > 59 || ss > 60) throw Error("time of day out of range in '" + std::string(text) + "'");
  long offset_s = 0;
  if (pos < text.size()) {
    const char z = text[pos];
    if (z == 'Z' && pos + 1 == text.size()) {
      // UTC
    } else if ((z == '+' || z == '-') && pos + 6 == text.size()) {
      const int oh = parse_digits(text, pos + 1, 2, text);
      expect_char(text, pos + 3, ':', text);
      const int om = parse_digits(text, pos + 4, 2, text);
      offset_s = (z == '+' ? 1 : -1) * (oh * 3600L + om * 60L);
    } else {
      throw Error("malformed zone designator in '" + std::string(text) + "'");
    }
  }
  return Instant{day} + std::chrono::hours{hh} + std::chrono::minutes{mm} + Seconds{ss} - Seconds{offset_s};
}

std::string format_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_instant(Instant t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const long secs = static_cast<long>((t - day).count());
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%02ld:%02ld:%02ldZ", secs / 3600, (secs / 60) % 60, secs % 60);
  return format_date(day) + buf;
}

std::chrono::sys_days local_day(Instant t, double utc_offset_hours) {
  const auto shifted = t + Seconds{std::lround(utc_offset_hours * 3600.0)};
  return std::chrono::floor<std::chrono::days>(shifted);
}

Instant local_day_start(std::chrono::sys_days day, double utc_offset_hours) {
  return Instant{day} - Seconds{std::lround(utc_offset_hours * 3600.0)};
}

int day_of_year(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  const std::chrono::sys_days jan1{ymd.year() / std::chrono::January / 1};
  return static_cast<int>((day - jan1).count()) + 1;
}

double utc_hours(Instant t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  return static_cast<double>((t - day).count()) / 3600.0;
}

}  // namespace canopy
