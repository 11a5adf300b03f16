#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexcast/transactions.hpp"

namespace flexcast {

// Reproducible synthetic charging sessions, one category per spec (or the
// default category mix). Distribution parameters are deliberately simple and
// configurable: the generator replaces a proprietary dataset, it does not
// model one. Connection duration and energy use truncated lognormals;
// arrivals follow per-hour weights with category-specific shapes.
struct FleetSpec {
  // "residential", "commercial", "shared" or "mixed" (57.6/31/11.4 % split)
  std::string category = "mixed";
  int n_stations = 10;
  CivilDate start_date;
  CivilDate end_date;  // inclusive
  std::uint64_t seed = 1;
  double sessions_per_station_day = 1.2;

  // optional overrides of the per-category defaults
  std::optional<std::array<double, 24>> arrival_weights;
  std::optional<double> connection_hours_mean;
  std::optional<double> connection_hours_sigma;  // lognormal sigma
  double connection_hours_max = 30.0;            // raw cap before the 24 h grid cap
  std::optional<double> energy_kwh_mean;
  std::optional<double> energy_kwh_sigma;
  std::optional<std::vector<double>> p_max_choices_kw;

  void validate() const;
};

// Key = value file, '#' comments. Unknown keys are an error.
FleetSpec load_fleet_spec(std::istream& in);

// Deterministic for a given spec: same seed, same bytes. Stations have two
// connectors; a session arriving while both are busy is skipped. Every
// emitted session survives discretization (feasibility margin of one step).
std::vector<RawTransaction> generate(const FleetSpec& spec);

}  // namespace flexcast
