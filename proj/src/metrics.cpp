#include "flexcast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace flexcast {

namespace {

constexpr double kZeroEnergyTol = 1e-12;

void accumulate(const DayRecord& rec, std::array<double, 24>& cost,
                std::array<double, 24>& energy) {
  const Schedule& s = *rec.schedule;
  const Signal& sig = *rec.signal;
  const double dt = s.grid.dt_hours();
  for (int t = 0; t < s.grid.n_steps; ++t) {
    double p = 0.0;
    for (int n = 0; n < s.n_transactions(); ++n) p += s.power_kw(n, t);
    const double kwh = p * dt;
    const int h = s.grid.hour_of_day(t);
    cost[h] += sig.at(t) * kwh;
    energy[h] += kwh;
  }
}

std::map<int, double> table_from(const std::array<double, 24>& cost,
                                 const std::array<double, 24>& energy) {
  std::map<int, double> table;
  for (int h = 0; h < 24; ++h) {
    if (std::abs(energy[h]) > kZeroEnergyTol) table[h] = cost[h] / energy[h];
  }
  return table;
}

}  // namespace

std::map<int, double> hourly_avg_cost(std::span<const DayRecord> records) {
  std::array<double, 24> cost{}, energy{};
  for (const auto& rec : records) accumulate(rec, cost, energy);
  return table_from(cost, energy);
}

std::map<int, double> cost_increase_after_flex(std::span<const DayRecord> baseline,
                                               std::span<const DayRecord> adjusted) {
  if (baseline.size() != adjusted.size()) {
    throw ConfigError("baseline and adjusted schedule lists do not pair up");
  }
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (!(baseline[i].schedule->grid == adjusted[i].schedule->grid)) {
      throw ConfigError("paired schedules disagree on the grid at day " + std::to_string(i));
    }
  }
  const auto base = hourly_avg_cost(baseline);
  const auto adj = hourly_avg_cost(adjusted);
  std::map<int, double> delta;
  for (const auto& [h, v] : adj) {
    auto it = base.find(h);
    if (it != base.end()) delta[h] = v - it->second;
  }
  return delta;
}

std::vector<DailyPeak> daily_peak_by_hour(std::span<const Schedule* const> schedules) {
  std::vector<DailyPeak> out;
  out.reserve(schedules.size());
  for (const Schedule* sp : schedules) {
    const Schedule& s = *sp;
    DailyPeak peak;
    peak.date = s.grid.anchor_date;
    bool first = true;
    for (int t = s.grid.anchor_day_begin(); t < s.grid.anchor_day_end(); ++t) {
      double p = 0.0;
      for (int n = 0; n < s.n_transactions(); ++n) p += s.power_kw(n, t);
      if (first || p > peak.peak_kw) {
        peak.peak_kw = p;
        peak.hour = s.grid.hour_of_day(t);
        first = false;
      }
    }
    out.push_back(peak);
  }
  return out;
}

void write_hourly_csv(std::ostream& out, const std::map<int, double>& table) {
  out << "hour,value\n";
  char buf[48];
  for (const auto& [h, v] : table) {
    std::snprintf(buf, sizeof buf, "%d,%.9g\n", h, v);
    out << buf;
  }
}

void write_peaks_csv(std::ostream& out, std::span<const DailyPeak> peaks) {
  out << "date,peak_kw,hour\n";
  char buf[64];
  for (const auto& p : peaks) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%d\n", format_date(p.date).c_str(), p.peak_kw, p.hour);
    out << buf;
  }
}

}  // namespace flexcast
