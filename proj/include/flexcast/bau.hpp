#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flexcast/lp.hpp"
#include "flexcast/signals.hpp"
#include "flexcast/time_grid.hpp"
#include "flexcast/transactions.hpp"

namespace flexcast {

enum class BauKind { cost_min, mef_min, unoptimized };

BauKind parse_bau_kind(const std::string& text);  // "cost" | "mef" | "unopt"
std::string to_string(BauKind k);

// Dispatch strategy: cost_min pairs with a day-ahead price signal, mef_min
// with an MEF signal, unoptimized needs none (charge as fast as possible).
struct BauStrategy {
  BauKind kind = BauKind::unoptimized;
  std::shared_ptr<const Signal> signal;

  void validate() const;
};

// Per-transaction, per-step power plan plus the cumulative-energy
// trajectories. energy_kwh(n, t) is the energy delivered before step t and
// has n_steps + 1 columns per transaction.
struct Schedule {
  TimeGrid grid;
  BauStrategy strategy;
  std::vector<Transaction> transactions;
  std::vector<double> power;   // [n_transactions x n_steps]
  std::vector<double> energy;  // [n_transactions x (n_steps + 1)]

  int n_transactions() const { return static_cast<int>(transactions.size()); }
  double power_kw(int n, int t) const { return power[std::size_t(n) * grid.n_steps + t]; }
  double& power_kw(int n, int t) { return power[std::size_t(n) * grid.n_steps + t]; }
  double energy_kwh(int n, int t) const {
    return energy[std::size_t(n) * (grid.n_steps + 1) + t];
  }
  double& energy_kwh(int n, int t) { return energy[std::size_t(n) * (grid.n_steps + 1) + t]; }
  bool is_v2g() const;
};

// Sets the strategy objective on a feasibility LP: cost_min and mef_min
// minimize the signal-weighted energy cost, unoptimized maximizes the summed
// cumulative energy, which front-loads charging ("charge as fast as
// possible").
void apply_bau_objective(LinearProgram& lp, const VariableLayout& layout,
                         std::span<const Transaction> transactions, const TimeGrid& grid,
                         const BauStrategy& strategy);

// Solves the dispatch LP for the given strategy. An empty transaction list
// yields an empty schedule.
Schedule schedule_bau(std::span<const Transaction> transactions, const TimeGrid& grid,
                      const BauStrategy& strategy, const SolveOptions& options = {});

// Sum of power over transactions, one entry per step (kW).
std::vector<double> aggregate_profile(const Schedule& schedule);

// Signal-weighted cost of the whole schedule (EUR or kgCO2).
double schedule_cost(const Schedule& schedule, const Signal& signal);

// CSV export: transaction_id,step,power_kw
void write_schedule_csv(std::ostream& out, const Schedule& schedule);

}  // namespace flexcast
