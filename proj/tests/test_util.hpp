#pragma once

// Shared builders for tests: grids, signals, tiny instances, random fleets.
// Must stay doctest-free: the acceptance binary uses it too.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "flexcast/bau.hpp"
#include "flexcast/flex.hpp"
#include "flexcast/signals.hpp"
#include "flexcast/synth.hpp"

namespace flexcast::testing {

inline TimeGrid test_grid() {
  return TimeGrid::three_day(CivilDate{2023, 6, 15});
}

inline std::shared_ptr<Signal> constant_signal(const TimeGrid& grid, SignalKind kind,
                                               double value) {
  auto s = std::make_shared<Signal>();
  s->kind = kind;
  s->unit = kind == SignalKind::day_ahead_price ? "EUR/kWh" : "kgCO2/kWh";
  s->values.assign(static_cast<std::size_t>(grid.n_steps), value);
  return s;
}

// Hourly-constant signal (each hour's value broadcast over its four steps),
// mirroring hourly market data.
inline std::shared_ptr<Signal> hourly_signal(const TimeGrid& grid, SignalKind kind,
                                             std::uint64_t seed, double lo, double hi) {
  auto s = constant_signal(grid, kind, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  double value = dist(rng);
  for (int t = 0; t < grid.n_steps; ++t) {
    if (t % 4 == 0) value = dist(rng);
    s->values[static_cast<std::size_t>(t)] = value;
  }
  return s;
}

inline Transaction make_tx(int id, int arrive, int duration, double energy_kwh, double p_max_kw,
                           bool v2g, Category category = Category::residential) {
  Transaction t;
  t.id = id;
  t.category = category;
  t.arrive_step = arrive;
  t.depart_step = arrive + duration;
  t.energy_kwh = energy_kwh;
  t.p_max_kw = p_max_kw;
  t.p_min_kw = v2g ? -p_max_kw : 0.0;
  return t;
}

inline BauStrategy strategy_for(BauKind kind, std::shared_ptr<const Signal> price,
                                std::shared_ptr<const Signal> mef) {
  BauStrategy s;
  s.kind = kind;
  if (kind == BauKind::cost_min) s.signal = std::move(price);
  if (kind == BauKind::mef_min) s.signal = std::move(mef);
  return s;
}

// A sampled synthetic day: transactions discretized on the grid of `date`.
inline std::vector<Transaction> sampled_fleet(const CivilDate& date, const std::string& category,
                                              int n_stations, std::uint64_t seed, bool v2g,
                                              double sessions_per_station_day = 1.2) {
  FleetSpec spec;
  spec.category = category;
  spec.n_stations = n_stations;
  spec.start_date = add_days(date, -1);
  spec.end_date = date;
  spec.seed = seed;
  spec.sessions_per_station_day = sessions_per_station_day;
  const auto raws = generate(spec);
  const TimeGrid grid = TimeGrid::three_day(date);
  return sample_day(discretize_all(raws, grid, v2g).transactions, grid);
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("flexcast_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Hourly signal CSV covering [first - 1 day, last + 2 days).
inline void write_signal_csv(const std::string& path, const CivilDate& first,
                             const CivilDate& last, std::uint64_t seed, double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  out << "timestamp,value\n";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::int64_t d = day_number(first) - 1; d < day_number(last) + 2; ++d) {
    for (int h = 0; h < 24; ++h) {
      out << format_datetime(DateTime{civil_from_day_number(d), h * 3600}) << ','
          << dist(rng) << '\n';
    }
  }
}

}  // namespace flexcast::testing
