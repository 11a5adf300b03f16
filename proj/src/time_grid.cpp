#include "flexcast/time_grid.hpp"

#include <cstdio>

namespace flexcast {

// Howard Hinnant's civil-date algorithms.
std::int64_t day_number(const CivilDate& d) {
  const int y = d.year - (d.month <= 2 ? 1 : 0);
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(d.month + (d.month > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d.day) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_day_number(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
  return CivilDate{static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m),
                   static_cast<int>(d)};
}

CivilDate add_days(const CivilDate& d, int days) {
  return civil_from_day_number(day_number(d) + days);
}

namespace {

bool valid_date(const CivilDate& d) {
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return false;
  return civil_from_day_number(day_number(d)) == d;
}

}  // namespace

CivilDate parse_date(const std::string& text) {
  CivilDate d;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &extra) != 3 ||
      !valid_date(d)) {
    throw ParseError("invalid date '" + text + "', expected YYYY-MM-DD");
  }
  return d;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

DateTime parse_datetime(const std::string& text) {
  CivilDate d;
  int hh = 0, mm = 0, ss = 0;
  char sep = 0;
  int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &d.year, &d.month, &d.day, &sep, &hh,
                      &mm, &ss);
  if (n < 6 || (sep != 'T' && sep != ' ') || !valid_date(d) || hh < 0 || hh > 23 || mm < 0 ||
      mm > 59 || ss < 0 || ss > 59) {
    throw ParseError("invalid timestamp '" + text + "', expected YYYY-MM-DD[T ]HH:MM[:SS]");
  }
  if (n == 6) ss = 0;
  return DateTime{d, hh * 3600 + mm * 60 + ss};
}

std::string format_datetime(const DateTime& t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", t.date.year, t.date.month,
                t.date.day, t.second_of_day / 3600, (t.second_of_day / 60) % 60,
                t.second_of_day % 60);
  return buf;
}

TimeGrid TimeGrid::three_day(const CivilDate& anchor) {
  TimeGrid g;
  g.anchor_date = anchor;
  g.step_minutes = 15;
  g.start_offset_steps = 96;
  g.n_steps = 288;
  return g;
}

DateTime TimeGrid::step_start(int step) const {
  const std::int64_t sec = start_second() + std::int64_t(step) * step_minutes * 60;
  std::int64_t days = sec / 86400;
  std::int64_t sod = sec % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  return DateTime{civil_from_day_number(days), static_cast<int>(sod)};
}

int TimeGrid::nearest_step(const DateTime& t) const {
  const std::int64_t step_sec = std::int64_t(step_minutes) * 60;
  const std::int64_t delta = t.epoch_seconds() - start_second();
  // round half up
  std::int64_t num = delta + step_sec / 2;
  std::int64_t q = num / step_sec;
  if (num < 0 && num % step_sec != 0) q -= 1;
  return static_cast<int>(q);
}

bool TimeGrid::time_in_horizon(const DateTime& t) const {
  const std::int64_t sec = t.epoch_seconds();
  const std::int64_t end = start_second() + std::int64_t(n_steps) * step_minutes * 60;
  return sec >= start_second() && sec < end;
}

int TimeGrid::hour_of_day(int step) const {
  return step_start(step).second_of_day / 3600;
}

CivilDate TimeGrid::date_of_step(int step) const {
  return step_start(step).date;
}

}  // namespace flexcast
