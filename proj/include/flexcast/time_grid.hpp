#pragma once

#include <cstdint>
#include <string>

#include "flexcast/errors.hpp"

namespace flexcast {

// Calendar date on the local (grid) clock. No timezone handling: inputs are
// expected on a uniform local clock, see README.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend bool operator==(const CivilDate&, const CivilDate&) = default;
  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// Days since 1970-01-01 (can be negative).
std::int64_t day_number(const CivilDate& d);
CivilDate civil_from_day_number(std::int64_t days);
CivilDate add_days(const CivilDate& d, int days);

CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& d);

// Wall-clock timestamp at second resolution.
struct DateTime {
  CivilDate date;
  int second_of_day = 0;  // [0, 86400)

  std::int64_t epoch_seconds() const { return day_number(date) * 86400 + second_of_day; }

  friend bool operator==(const DateTime&, const DateTime&) = default;
};

// Accepts "YYYY-MM-DD HH:MM[:SS]" and "YYYY-MM-DDTHH:MM[:SS]".
DateTime parse_datetime(const std::string& text);
std::string format_datetime(const DateTime& t);

// Discretized optimization horizon anchored to a sample day. The standard
// horizon spans [anchor - 1 day, anchor + 2 days) in 15-minute steps, so the
// sample day itself is steps [start_offset_steps, start_offset_steps + 96).
struct TimeGrid {
  CivilDate anchor_date;
  int step_minutes = 15;
  int start_offset_steps = 96;  // steps before anchor-day midnight
  int n_steps = 288;

  static TimeGrid three_day(const CivilDate& anchor);

  double dt_hours() const { return step_minutes / 60.0; }
  int steps_per_day() const { return 24 * 60 / step_minutes; }

  // Epoch second of step 0.
  std::int64_t start_second() const {
    return day_number(anchor_date) * 86400 - std::int64_t(start_offset_steps) * step_minutes * 60;
  }

  DateTime step_start(int step) const;

  // Nearest grid step for a wall-clock time; ties round up to the later step.
  // The result may equal n_steps when the time rounds to the horizon end.
  int nearest_step(const DateTime& t) const;

  bool time_in_horizon(const DateTime& t) const;
  bool step_in_grid(int step) const { return step >= 0 && step < n_steps; }

  int hour_of_day(int step) const;
  CivilDate date_of_step(int step) const;

  // First/one-past-last step of the anchor (sample) day.
  int anchor_day_begin() const { return start_offset_steps; }
  int anchor_day_end() const { return start_offset_steps + steps_per_day(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace flexcast
