#include "flexcast/transactions.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "csv.hpp"

namespace flexcast {

Category parse_category(const std::string& text) {
  if (text == "residential") return Category::residential;
  if (text == "commercial") return Category::commercial;
  if (text == "shared") return Category::shared;
  throw ParseError("unknown category '" + text + "'");
}

std::string to_string(Category c) {
  switch (c) {
    case Category::residential: return "residential";
    case Category::commercial: return "commercial";
    case Category::shared: return "shared";
  }
  return "?";
}

std::vector<RawTransaction> parse_transactions(std::istream& in) {
  CsvReader reader(in, {"station_id", "category", "arrival", "departure", "energy_kwh",
                        "max_power_kw"});
  std::vector<RawTransaction> out;
  while (reader.next_row()) {
    RawTransaction t;
    t.station_id = reader.field("station_id");
    t.category = parse_category_field(reader, "category");
    t.arrival = reader.datetime_field("arrival");
    t.departure = reader.datetime_field("departure");
    t.energy_kwh = reader.double_field("energy_kwh");
    t.max_power_kw = reader.double_field("max_power_kw");
    if (t.energy_kwh < 0.0) reader.fail("energy_kwh", "must be non-negative");
    if (t.max_power_kw <= 0.0) reader.fail("max_power_kw", "must be positive");
    if (t.departure.epoch_seconds() <= t.arrival.epoch_seconds()) {
      reader.fail("departure", "must be after arrival");
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_transactions_csv(std::ostream& out, std::span<const RawTransaction> rows) {
  out << "station_id,category,arrival,departure,energy_kwh,max_power_kw\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.station_id << ',' << to_string(r.category) << ',' << format_datetime(r.arrival)
        << ',' << format_datetime(r.departure) << ',';
    std::snprintf(buf, sizeof buf, "%.3f,%.2f\n", r.energy_kwh, r.max_power_kw);
    out << buf;
  }
}

std::optional<Transaction> discretize(const RawTransaction& raw, const TimeGrid& grid, bool v2g,
                                      int id) {
  if (!grid.time_in_horizon(raw.arrival)) {
    throw HorizonError("arrival " + format_datetime(raw.arrival) + " outside grid horizon [" +
                       format_datetime(grid.step_start(0)) + ", " +
                       format_datetime(grid.step_start(grid.n_steps)) + ")");
  }
  int arrive = grid.nearest_step(raw.arrival);
  int depart = grid.nearest_step(raw.departure);
  depart = std::min(depart, arrive + kMaxConnectionSteps);
  depart = std::min(depart, grid.n_steps);
  if (depart <= arrive || arrive >= grid.n_steps) return std::nullopt;

  const double capacity_kwh = (depart - arrive) * grid.dt_hours() * raw.max_power_kw;
  if (raw.energy_kwh > capacity_kwh + 1e-9) return std::nullopt;

  Transaction t;
  t.id = id;
  t.category = raw.category;
  t.arrive_step = arrive;
  t.depart_step = depart;
  t.energy_kwh = raw.energy_kwh;
  t.p_max_kw = raw.max_power_kw;
  t.p_min_kw = v2g ? -raw.max_power_kw : 0.0;
  return t;
}

DiscretizeReport discretize_all(std::span<const RawTransaction> raws, const TimeGrid& grid,
                                bool v2g) {
  DiscretizeReport report;
  report.n_input = static_cast<int>(raws.size());
  int id = 0;
  for (const auto& raw : raws) {
    auto t = discretize(raw, grid, v2g, id++);
    if (t) {
      report.transactions.push_back(*t);
    } else {
      ++report.n_excluded;
    }
  }
  return report;
}

std::vector<Transaction> sample_day(std::span<const Transaction> transactions,
                                    const TimeGrid& grid) {
  // Arrivals on the anchor date or the day before, i.e. the first two days of
  // the standard horizon.
  const int lo = grid.anchor_day_begin() - grid.steps_per_day();
  const int hi = grid.anchor_day_end();
  std::vector<Transaction> out;
  for (const auto& t : transactions) {
    if (t.arrive_step >= lo && t.arrive_step < hi) out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [](const Transaction& a, const Transaction& b) {
    if (a.arrive_step != b.arrive_step) return a.arrive_step < b.arrive_step;
    return a.id < b.id;
  });
  return out;
}

}  // namespace flexcast
