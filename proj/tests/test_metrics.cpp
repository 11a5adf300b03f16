#include <doctest.h>

#include <sstream>

#include "flexcast/metrics.hpp"
#include "test_util.hpp"

using namespace flexcast;
using namespace flexcast::testing;

TEST_CASE("a single delivery populates exactly its hour") {
  const TimeGrid g = test_grid();
  // all energy flows at 18:00-19:00 of the anchor day at 0.2 EUR/kWh
  const auto tx = make_tx(0, 96 + 18 * 4, 4, 11.0, 11.0, false);
  const Schedule s = schedule_bau({&tx, 1}, g, BauStrategy{BauKind::unoptimized, nullptr});
  const auto price = constant_signal(g, SignalKind::day_ahead_price, 0.2);
  const DayRecord rec{&s, price.get()};
  const auto table = hourly_avg_cost({&rec, 1});
  REQUIRE(table.size() == 1);
  CHECK(table.count(18) == 1);
  CHECK(table.at(18) == doctest::Approx(0.2));
}

TEST_CASE("flat prices report the price in every populated hour") {
  const TimeGrid g = test_grid();
  std::vector<Transaction> txs = {make_tx(0, 100, 20, 12.0, 11.0, false),
                                  make_tx(1, 150, 16, 8.0, 11.0, false)};
  const Schedule s = schedule_bau(txs, g, BauStrategy{BauKind::unoptimized, nullptr});
  const auto price = constant_signal(g, SignalKind::day_ahead_price, 0.31);
  const DayRecord rec{&s, price.get()};
  for (const auto& [hour, value] : hourly_avg_cost({&rec, 1})) {
    (void)hour;
    CHECK(value == doctest::Approx(0.31));
  }
}

TEST_CASE("energy-weighted mean of the hourly table equals total cost over total energy") {
  const TimeGrid g = test_grid();
  const auto price = hourly_signal(g, SignalKind::day_ahead_price, 5, -0.05, 0.45);
  std::vector<Transaction> txs;
  std::mt19937_64 rng(6);
  for (int n = 0; n < 6; ++n) {
    txs.push_back(make_tx(n, 100 + static_cast<int>(rng() % 60), 8 + static_cast<int>(rng() % 20),
                          2.0 + (rng() % 80) / 10.0, 11.0, false));
  }
  const Schedule s = schedule_bau(txs, g, strategy_for(BauKind::cost_min, price, nullptr));
  const DayRecord rec{&s, price.get()};
  const auto table = hourly_avg_cost({&rec, 1});

  // recompute the per-hour energies to weight the table
  const auto agg = aggregate_profile(s);
  std::array<double, 24> energy{};
  double total_energy = 0.0;
  for (int t = 0; t < g.n_steps; ++t) {
    energy[g.hour_of_day(t)] += agg[t] * 0.25;
    total_energy += agg[t] * 0.25;
  }
  double weighted = 0.0;
  for (const auto& [h, v] : table) weighted += v * energy[h];
  const double total_cost = schedule_cost(s, *price);
  CHECK(weighted == doctest::Approx(total_cost).epsilon(1e-9));
  CHECK(weighted / total_energy == doctest::Approx(total_cost / total_energy).epsilon(1e-9));
}

TEST_CASE("identical schedules have zero cost increase") {
  const TimeGrid g = test_grid();
  const auto tx = make_tx(0, 120, 8, 5.0, 11.0, false);
  const Schedule s = schedule_bau({&tx, 1}, g, BauStrategy{BauKind::unoptimized, nullptr});
  const auto price = hourly_signal(g, SignalKind::day_ahead_price, 9, 0.0, 0.4);
  const DayRecord rec{&s, price.get()};
  const auto delta = cost_increase_after_flex({&rec, 1}, {&rec, 1});
  REQUIRE(!delta.empty());
  for (const auto& [h, v] : delta) {
    (void)h;
    CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("unpaired schedule lists are rejected") {
  const TimeGrid g = test_grid();
  const auto tx = make_tx(0, 120, 8, 5.0, 11.0, false);
  const Schedule s = schedule_bau({&tx, 1}, g, BauStrategy{BauKind::unoptimized, nullptr});
  const auto price = constant_signal(g, SignalKind::day_ahead_price, 0.2);
  const DayRecord rec{&s, price.get()};
  std::vector<DayRecord> two = {rec, rec};
  CHECK_THROWS_AS(cost_increase_after_flex({&rec, 1}, two), ConfigError);
}

TEST_CASE("daily peak reports the anchor-day maximum and its hour") {
  const TimeGrid g = test_grid();

  SUBCASE("single EV charging at 18:00") {
    const auto tx = make_tx(0, 96 + 18 * 4, 4, 11.0, 11.0, false);
    const Schedule s = schedule_bau({&tx, 1}, g, BauStrategy{BauKind::unoptimized, nullptr});
    const Schedule* sp = &s;
    const auto peaks = daily_peak_by_hour({&sp, 1});
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].date == g.anchor_date);
    CHECK(peaks[0].peak_kw == doctest::Approx(11.0));
    CHECK(peaks[0].hour == 18);
  }

  SUBCASE("flat profile reports the earliest hour") {
    // spread 24 kWh evenly over the anchor day via a capacity-style schedule
    Schedule s;
    s.grid = g;
    s.strategy = BauStrategy{BauKind::unoptimized, nullptr};
    s.transactions = {make_tx(0, 96, 96, 24.0, 11.0, false)};
    s.power.assign(static_cast<std::size_t>(g.n_steps), 0.0);
    s.energy.assign(static_cast<std::size_t>(g.n_steps) + 1, 0.0);
    for (int t = 96; t < 192; ++t) s.power_kw(0, t) = 1.0;
    const Schedule* sp = &s;
    const auto peaks = daily_peak_by_hour({&sp, 1});
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].hour == 0);
    CHECK(peaks[0].peak_kw == doctest::Approx(1.0));
  }

  SUBCASE("peak equals the aggregate-profile maximum over the day") {
    std::vector<Transaction> txs = {make_tx(0, 130, 10, 8.0, 11.0, false),
                                    make_tx(1, 134, 10, 6.0, 11.0, false)};
    const Schedule s = schedule_bau(txs, g, BauStrategy{BauKind::unoptimized, nullptr});
    const Schedule* sp = &s;
    const auto peaks = daily_peak_by_hour({&sp, 1});
    const auto agg = aggregate_profile(s);
    double best = 0.0;
    for (int t = g.anchor_day_begin(); t < g.anchor_day_end(); ++t) best = std::max(best, agg[t]);
    CHECK(peaks[0].peak_kw == doctest::Approx(best));
  }
}

TEST_CASE("metric CSV writers") {
  std::map<int, double> table = {{8, 0.25}, {19, -0.05}};
  std::ostringstream hourly;
  write_hourly_csv(hourly, table);
  CHECK(hourly.str() == "hour,value\n8,0.25\n19,-0.05\n");

  std::vector<DailyPeak> peaks = {{CivilDate{2023, 6, 15}, 42.5, 18}};
  std::ostringstream pk;
  write_peaks_csv(pk, peaks);
  CHECK(pk.str() == "date,peak_kw,hour\n2023-06-15,42.5,18\n");
}
