#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "flexcast/transactions.hpp"
#include "test_util.hpp"

using namespace flexcast;
using namespace flexcast::testing;

namespace {

RawTransaction raw(const char* arrive, const char* depart, double energy, double p_max) {
  RawTransaction r;
  r.station_id = "st-1";
  r.category = Category::residential;
  r.arrival = parse_datetime(arrive);
  r.departure = parse_datetime(depart);
  r.energy_kwh = energy;
  r.max_power_kw = p_max;
  return r;
}

}  // namespace

TEST_CASE("transaction CSV parsing") {
  SUBCASE("header plus one valid row") {
    std::istringstream in(
        "station_id,category,arrival,departure,energy_kwh,max_power_kw\n"
        "st-1,residential,2023-06-15T08:00:00,2023-06-15T12:00:00,7.5,11\n");
    const auto rows = parse_transactions(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].station_id == "st-1");
    CHECK(rows[0].energy_kwh == 7.5);
  }
  SUBCASE("header only yields empty list") {
    std::istringstream in("station_id,category,arrival,departure,energy_kwh,max_power_kw\n");
    CHECK(parse_transactions(in).empty());
  }
  SUBCASE("departure before arrival is an error naming the row") {
    std::istringstream in(
        "station_id,category,arrival,departure,energy_kwh,max_power_kw\n"
        "st-1,residential,2023-06-15T12:00:00,2023-06-15T08:00:00,7.5,11\n");
    CHECK_THROWS_WITH_AS(parse_transactions(in),
                         doctest::Contains("row 2"), ParseError);
  }
  SUBCASE("missing column") {
    std::istringstream in("station_id,category,arrival,departure,energy_kwh\nx\n");
    CHECK_THROWS_AS(parse_transactions(in), ParseError);
  }
  SUBCASE("negative energy") {
    std::istringstream in(
        "station_id,category,arrival,departure,energy_kwh,max_power_kw\n"
        "st-1,shared,2023-06-15T08:00:00,2023-06-15T12:00:00,-1,11\n");
    CHECK_THROWS_AS(parse_transactions(in), ParseError);
  }
  SUBCASE("bad timestamp names the field") {
    std::istringstream in(
        "station_id,category,arrival,departure,energy_kwh,max_power_kw\n"
        "st-1,shared,yesterday,2023-06-15T12:00:00,1,11\n");
    CHECK_THROWS_WITH_AS(parse_transactions(in), doctest::Contains("arrival"), ParseError);
  }
}

TEST_CASE("discretize rounds to the nearest step") {
  const TimeGrid g = test_grid();
  // 08:07 -> 08:00, 10:08 -> 10:15; 9 steps at 11 kW can deliver 24.75 kWh
  const auto t = discretize(raw("2023-06-15T08:07:00", "2023-06-15T10:08:00", 5.0, 11.0), g,
                            false, 0);
  REQUIRE(t.has_value());
  CHECK(t->arrive_step == 96 + 32);
  CHECK(t->depart_step == 96 + 41);
  CHECK(t->p_min_kw == 0.0);
  CHECK(t->p_max_kw == 11.0);
}

TEST_CASE("discretize excludes sessions that cannot charge after rounding") {
  const TimeGrid g = test_grid();
  // rounds to a single step: 0.25 h * 11 kW = 2.75 kWh < 5 kWh
  const auto t = discretize(raw("2023-06-15T08:00:00", "2023-06-15T08:10:00", 5.0, 11.0), g,
                            false, 0);
  CHECK_FALSE(t.has_value());
  // the same session with a small enough demand stays
  const auto ok = discretize(raw("2023-06-15T08:00:00", "2023-06-15T08:10:00", 2.75, 11.0), g,
                             false, 0);
  REQUIRE(ok.has_value());
  CHECK(ok->duration_steps() == 1);
}

TEST_CASE("discretize caps the connection at 96 steps") {
  const TimeGrid g = test_grid();
  const auto t = discretize(raw("2023-06-14T06:00:00", "2023-06-15T12:00:00", 10.0, 11.0), g,
                            false, 0);  // 30 h connection
  REQUIRE(t.has_value());
  CHECK(t->depart_step == t->arrive_step + 96);
}

TEST_CASE("discretize flags arrivals outside the horizon") {
  const TimeGrid g = test_grid();
  CHECK_THROWS_AS(discretize(raw("2023-06-13T10:00:00", "2023-06-13T12:00:00", 1.0, 11.0), g,
                             false, 0),
                  HorizonError);
}

TEST_CASE("discretize sets V2G power bounds") {
  const TimeGrid g = test_grid();
  const auto t = discretize(raw("2023-06-15T08:00:00", "2023-06-15T12:00:00", 5.0, 11.0), g,
                            true, 3);
  REQUIRE(t.has_value());
  CHECK(t->p_min_kw == -11.0);
  CHECK(t->is_v2g());
}

TEST_CASE("discretize is idempotent on aligned timestamps") {
  const TimeGrid g = test_grid();
  const auto t = discretize(raw("2023-06-15T08:00:00", "2023-06-15T12:15:00", 5.0, 11.0), g,
                            false, 0);
  REQUIRE(t.has_value());
  // re-expressing the rounded steps as timestamps and rounding again is a no-op
  const auto again = discretize(raw(format_datetime(g.step_start(t->arrive_step)).c_str(),
                                    format_datetime(g.step_start(t->depart_step)).c_str(), 5.0,
                                    11.0),
                                g, false, 0);
  REQUIRE(again.has_value());
  CHECK(again->arrive_step == t->arrive_step);
  CHECK(again->depart_step == t->depart_step);
}

TEST_CASE("sample_day keeps anchor-day and previous-day arrivals") {
  const TimeGrid g = test_grid();
  std::vector<Transaction> txs = {
      make_tx(0, 100, 4, 2.0, 11.0, false),  // anchor day
      make_tx(1, 10, 4, 2.0, 11.0, false),   // previous day
      make_tx(2, 200, 4, 2.0, 11.0, false),  // day after anchor
  };
  const auto sampled = sample_day(txs, g);
  REQUIRE(sampled.size() == 2);
  CHECK(sampled[0].id == 1);  // sorted by arrival
  CHECK(sampled[1].id == 0);
}

TEST_CASE("sample_day is stable under permutation") {
  const TimeGrid g = test_grid();
  std::vector<Transaction> txs;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    txs.push_back(make_tx(i, static_cast<int>(rng() % 280), 4, 2.0, 11.0, false));
  }
  auto sorted_once = sample_day(txs, g);
  std::shuffle(txs.begin(), txs.end(), rng);
  CHECK(sample_day(txs, g) == sorted_once);
  for (const auto& t : sorted_once) {
    CHECK(t.arrive_step < g.anchor_day_end());
  }
}

TEST_CASE("every discretized transaction satisfies the feasibility invariant") {
  const TimeGrid g = test_grid();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> hours(0.1, 40.0);
  std::uniform_real_distribution<double> kwh(0.1, 80.0);
  int kept = 0;
  for (int i = 0; i < 500; ++i) {
    const int arrive_min = static_cast<int>(rng() % (2 * 24 * 60));
    const double dur_h = hours(rng);
    RawTransaction r;
    r.station_id = "x";
    r.category = Category::shared;
    r.arrival = g.step_start(0);
    r.arrival.second_of_day = 0;
    const std::int64_t asec = g.start_second() + arrive_min * 60;
    r.arrival = DateTime{civil_from_day_number(asec / 86400), static_cast<int>(asec % 86400)};
    const std::int64_t dsec = asec + static_cast<std::int64_t>(dur_h * 3600);
    r.departure = DateTime{civil_from_day_number(dsec / 86400), static_cast<int>(dsec % 86400)};
    r.energy_kwh = kwh(rng);
    r.max_power_kw = 11.0;
    const auto t = discretize(r, g, rng() % 2 == 0, i);
    if (!t) continue;
    ++kept;
    CHECK(t->duration_steps() * g.dt_hours() * t->p_max_kw + 1e-9 >= t->energy_kwh);
    CHECK(t->duration_steps() <= 96);
    CHECK(t->arrive_step < t->depart_step);
  }
  CHECK(kept > 100);
}
