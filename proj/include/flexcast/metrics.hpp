#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "flexcast/bau.hpp"

namespace flexcast {

// One day's schedule with the price (or MEF) signal of its grid.
struct DayRecord {
  const Schedule* schedule = nullptr;
  const Signal* signal = nullptr;
};

// Energy-weighted average cost per hour of day, EUR/kWh (or kgCO2/kWh):
// sum of cost in hour h divided by net kWh delivered in hour h, aggregated
// over all records. Hours with zero net delivered energy are absent.
std::map<int, double> hourly_avg_cost(std::span<const DayRecord> records);

// Per-hour difference of the averaged costs, adjusted minus baseline, over
// hours populated on both sides. Throws ConfigError when the lists do not
// pair up day by day.
std::map<int, double> cost_increase_after_flex(std::span<const DayRecord> baseline,
                                               std::span<const DayRecord> adjusted);

struct DailyPeak {
  CivilDate date;
  double peak_kw = 0.0;
  int hour = 0;  // hour of day of the peak; earliest step wins ties
};

// Maximum aggregate power over each schedule's sample day.
std::vector<DailyPeak> daily_peak_by_hour(std::span<const Schedule* const> schedules);

void write_hourly_csv(std::ostream& out, const std::map<int, double>& table);
void write_peaks_csv(std::ostream& out, std::span<const DailyPeak> peaks);

}  // namespace flexcast
