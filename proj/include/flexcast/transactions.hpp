#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexcast/time_grid.hpp"

namespace flexcast {

enum class Category { residential, commercial, shared };

Category parse_category(const std::string& text);
std::string to_string(Category c);

// One charging session as recorded: wall-clock times, energy demand, rating.
struct RawTransaction {
  std::string station_id;
  Category category = Category::residential;
  DateTime arrival;
  DateTime departure;
  double energy_kwh = 0.0;
  double max_power_kw = 0.0;
};

// Session mapped onto a TimeGrid. Power acts on steps [arrive_step,
// depart_step); p_min_kw is 0 for unidirectional charging and -p_max_kw for
// bidirectional (V2G).
struct Transaction {
  int id = 0;
  Category category = Category::residential;
  int arrive_step = 0;
  int depart_step = 0;
  double energy_kwh = 0.0;
  double p_max_kw = 0.0;
  double p_min_kw = 0.0;

  int duration_steps() const { return depart_step - arrive_step; }
  bool is_v2g() const { return p_min_kw < 0.0; }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Parses the transaction CSV (header required):
//   station_id,category,arrival,departure,energy_kwh,max_power_kw
// Throws ParseError naming the offending row and field.
std::vector<RawTransaction> parse_transactions(std::istream& in);

void write_transactions_csv(std::ostream& out, std::span<const RawTransaction> rows);

// Maximum connection duration: 24 hours(96 steps of 15 min).
inline constexpr int kMaxConnectionSteps = 96;

// Rounds arrival/departure to the nearest grid step (ties up), caps the
// connection at 24 h by pulling the departure earlier, and applies the
// post-rounding feasibility filter. Returns nullopt when the session is
// excluded (zero rounded duration or not enough connected time to deliver the
// energy). Throws HorizonError when the arrival lies outside the grid.
std::optional<Transaction> discretize(const RawTransaction& raw, const TimeGrid& grid, bool v2g,
                                      int id);

struct DiscretizeReport {
  std::vector<Transaction> transactions;
  int n_input = 0;
  int n_excluded = 0;
};

DiscretizeReport discretize_all(std::span<const RawTransaction> raws, const TimeGrid& grid,
                                bool v2g);

// Keeps transactions whose arrival falls on the grid's anchor date or the
// preceding day; output sorted by (arrive_step, id).
std::vector<Transaction> sample_day(std::span<const Transaction> transactions,
                                    const TimeGrid& grid);

}  // namespace flexcast
