#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flexcast/time_grid.hpp"

namespace flexcast {

enum class SignalKind { day_ahead_price, mef };

std::string to_string(SignalKind k);

// Per-step series aligned to a TimeGrid: day-ahead prices in EUR/kWh or
// marginal emission factors in kgCO2/kWh.
struct Signal {
  SignalKind kind = SignalKind::day_ahead_price;
  std::string unit;
  std::vector<double> values;  // one entry per grid step

  double at(int step) const { return values[static_cast<std::size_t>(step)]; }
};

// Raw (timestamp, value) rows of a signal CSV; reusable across grids.
using SignalRows = std::vector<std::pair<DateTime, double>>;

// Parses `timestamp,value` rows. Throws ParseError on malformed rows or
// duplicate timestamps.
SignalRows parse_signal_csv(std::istream& in);

// Aligns rows to the grid. Hourly rows broadcast to the four covered
// 15-minute steps; 15-minute rows map 1:1. Missing coverage raises a
// ParseError listing the gaps. MEF values must be non-negative; prices may be
// negative.
Signal align_signal(const SignalRows& rows, SignalKind kind, const TimeGrid& grid);

Signal load_signal(std::istream& in, SignalKind kind, const TimeGrid& grid);

}  // namespace flexcast
