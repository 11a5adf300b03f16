#include <doctest.h>

#include <map>
#include <sstream>

#include "flexcast/synth.hpp"
#include "test_util.hpp"

using namespace flexcast;
using namespace flexcast::testing;

namespace {

FleetSpec spec_of(const std::string& category, int stations, std::uint64_t seed) {
  FleetSpec spec;
  spec.category = category;
  spec.n_stations = stations;
  spec.start_date = CivilDate{2023, 6, 1};
  spec.end_date = CivilDate{2023, 6, 14};
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("same seed gives byte-identical output") {
  const auto spec = spec_of("mixed", 25, 42);
  std::ostringstream a, b;
  write_transactions_csv(a, generate(spec));
  write_transactions_csv(b, generate(spec));
  CHECK(a.str() == b.str());
  CHECK(a.str().size() > 1000);

  auto other = spec;
  other.seed = 43;
  std::ostringstream c;
  write_transactions_csv(c, generate(other));
  CHECK(a.str() != c.str());
}

TEST_CASE("zero stations generate nothing") {
  CHECK(generate(spec_of("residential", 0, 1)).empty());
}

TEST_CASE("residential arrivals cluster in the evening") {
  const auto rows = generate(spec_of("residential", 120, 7));
  REQUIRE(rows.size() > 800);
  int evening = 0;
  for (const auto& r : rows) {
    const int h = r.arrival.second_of_day / 3600;
    if (h >= 16 && h < 22) ++evening;
  }
  CHECK(static_cast<double>(evening) / static_cast<double>(rows.size()) > 0.6);
}

TEST_CASE("stations never run more than two concurrent sessions") {
  const auto rows = generate(spec_of("mixed", 40, 9));
  REQUIRE(!rows.empty());
  // sweep-line over arrivals/departures per station
  std::map<std::string, std::vector<std::pair<std::int64_t, int>>> events;
  for (const auto& r : rows) {
    events[r.station_id].emplace_back(r.arrival.epoch_seconds(), +1);
    events[r.station_id].emplace_back(r.departure.epoch_seconds(), -1);
  }
  for (auto& [station, ev] : events) {
    std::sort(ev.begin(), ev.end());
    int open = 0;
    for (const auto& [at, delta] : ev) {
      open += delta;
      CHECK(open <= 2);
      CHECK(open >= 0);
    }
  }
}

TEST_CASE("generated sessions survive discretization") {
  const auto rows = generate(spec_of("mixed", 80, 17));
  REQUIRE(rows.size() > 500);
  int excluded = 0, total = 0;
  // discretize every session on the grid of its own arrival day
  for (const auto& r : rows) {
    const TimeGrid g = TimeGrid::three_day(r.arrival.date);
    ++total;
    if (!discretize(r, g, false, 0).has_value()) ++excluded;
  }
  CHECK(static_cast<double>(excluded) / static_cast<double>(total) <= 0.001);
}

TEST_CASE("category mix follows the configured shares") {
  const auto rows = generate(spec_of("mixed", 200, 5));
  std::map<Category, int> counts;
  for (const auto& r : rows) ++counts[r.category];
  CHECK(counts[Category::residential] > counts[Category::commercial]);
  CHECK(counts[Category::commercial] > counts[Category::shared]);
  CHECK(counts[Category::shared] > 0);
}

TEST_CASE("fleet spec files parse with overrides") {
  std::istringstream in(
      "# fleet under test\n"
      "category = shared\n"
      "n_stations = 3\n"
      "start_date = 2023-06-01\n"
      "end_date = 2023-06-02\n"
      "seed = 11\n"
      "sessions_per_station_day = 2.0\n"
      "p_max_choices_kw = 11, 22\n"
      "energy_kwh_mean = 14.5\n");
  const FleetSpec spec = load_fleet_spec(in);
  CHECK(spec.category == "shared");
  CHECK(spec.n_stations == 3);
  CHECK(spec.seed == 11);
  REQUIRE(spec.p_max_choices_kw.has_value());
  CHECK(spec.p_max_choices_kw->size() == 2);
  CHECK(spec.energy_kwh_mean == doctest::Approx(14.5));
  const auto rows = generate(spec);
  for (const auto& r : rows) {
    CHECK((r.max_power_kw == 11.0 || r.max_power_kw == 22.0));
    CHECK(r.category == Category::shared);
  }
}

TEST_CASE("fleet spec rejects unknown keys and bad values") {
  {
    std::istringstream in("category = shared\nstart_date = 2023-06-01\nend_date = 2023-06-02\nwat = 1\n");
    CHECK_THROWS_WITH_AS(load_fleet_spec(in), doctest::Contains("unknown key"), ParseError);
  }
  {
    std::istringstream in("category = sharedest\nstart_date = 2023-06-01\nend_date = 2023-06-02\n");
    CHECK_THROWS_AS(load_fleet_spec(in), ParseError);
  }
  {
    std::istringstream in("category = shared\nstart_date = 2023-06-03\nend_date = 2023-06-02\n");
    CHECK_THROWS_AS(load_fleet_spec(in), ConfigError);
  }
}
