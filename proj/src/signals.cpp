#include "flexcast/signals.hpp"

#include <istream>
#include <map>
#include <sstream>

#include "csv.hpp"

namespace flexcast {

std::string to_string(SignalKind k) {
  return k == SignalKind::day_ahead_price ? "day_ahead_price" : "mef";
}

SignalRows parse_signal_csv(std::istream& in) {
  CsvReader reader(in, {"timestamp", "value"});
  SignalRows rows;
  while (reader.next_row()) {
    rows.emplace_back(reader.datetime_field("timestamp"), reader.double_field("value"));
  }
  return rows;
}

Signal align_signal(const SignalRows& rows, SignalKind kind, const TimeGrid& grid) {
  std::map<std::int64_t, double> by_second;
  for (const auto& [ts, value] : rows) {
    auto [it, inserted] = by_second.emplace(ts.epoch_seconds(), value);
    if (!inserted) {
      throw ParseError("duplicate signal timestamp " + format_datetime(ts));
    }
    if (kind == SignalKind::mef && value < 0.0) {
      throw ParseError("negative MEF value at " + format_datetime(ts));
    }
  }

  Signal s;
  s.kind = kind;
  s.unit = kind == SignalKind::day_ahead_price ? "EUR/kWh" : "kgCO2/kWh";
  s.values.resize(static_cast<std::size_t>(grid.n_steps));

  std::vector<std::string> gaps;
  for (int step = 0; step < grid.n_steps; ++step) {
    const std::int64_t sec = grid.start_second() + std::int64_t(step) * grid.step_minutes * 60;
    auto it = by_second.find(sec);
    if (it == by_second.end()) {
      // fall back to the enclosing hour (hourly series broadcast to 15 min)
      it = by_second.find(sec - (sec % 3600 + 3600) % 3600);
    }
    if (it == by_second.end()) {
      if (gaps.size() < 8) gaps.push_back(format_datetime(grid.step_start(step)));
      continue;
    }
    s.values[static_cast<std::size_t>(step)] = it->second;
  }
  if (!gaps.empty()) {
    std::ostringstream oss;
    oss << to_string(kind) << " signal does not cover the grid; first missing intervals:";
    for (const auto& g : gaps) oss << ' ' << g;
    throw ParseError(oss.str());
  }
  return s;
}

Signal load_signal(std::istream& in, SignalKind kind, const TimeGrid& grid) {
  return align_signal(parse_signal_csv(in), kind, grid);
}

}  // namespace flexcast
