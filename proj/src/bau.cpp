#include "flexcast/bau.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace flexcast {

BauKind parse_bau_kind(const std::string& text) {
  if (text == "cost") return BauKind::cost_min;
  if (text == "mef") return BauKind::mef_min;
  if (text == "unopt") return BauKind::unoptimized;
  throw ParseError("unknown BAU strategy '" + text + "', expected cost|mef|unopt");
}

std::string to_string(BauKind k) {
  switch (k) {
    case BauKind::cost_min: return "cost";
    case BauKind::mef_min: return "mef";
    case BauKind::unoptimized: return "unopt";
  }
  return "?";
}

void BauStrategy::validate() const {
  switch (kind) {
    case BauKind::cost_min:
      if (!signal || signal->kind != SignalKind::day_ahead_price) {
        throw ConfigError("cost-minimizing BAU requires a day-ahead price signal");
      }
      break;
    case BauKind::mef_min:
      if (!signal || signal->kind != SignalKind::mef) {
        throw ConfigError("MEF-minimizing BAU requires an MEF signal");
      }
      break;
    case BauKind::unoptimized:
      break;
  }
}

bool Schedule::is_v2g() const {
  for (const auto& tx : transactions) {
    if (tx.is_v2g()) return true;
  }
  return false;
}

namespace {

void check_instance(std::span<const Transaction> transactions, const TimeGrid& grid) {
  for (const auto& tx : transactions) {
    const double capacity = tx.duration_steps() * grid.dt_hours() * tx.p_max_kw;
    if (tx.arrive_step >= tx.depart_step || capacity + 1e-9 < tx.energy_kwh) {
      throw InternalError("transaction " + std::to_string(tx.id) +
                          " is infeasible; ingestion filtering should have excluded it");
    }
  }
}

}  // namespace

// Applies the strategy objective to a feasibility LP whose layout covers
// `n_transactions` transactions.
void apply_bau_objective(LinearProgram& lp, const VariableLayout& layout,
                         std::span<const Transaction> transactions, const TimeGrid& grid,
                         const BauStrategy& strategy) {
  const double dt = grid.dt_hours();
  switch (strategy.kind) {
    case BauKind::cost_min:
    case BauKind::mef_min:
      lp.sense = Sense::minimize;
      for (int n = 0; n < layout.n_transactions; ++n) {
        for (int t = transactions[n].arrive_step; t < transactions[n].depart_step; ++t) {
          lp.objective[layout.power_index(n, t)] = strategy.signal->at(t) * dt;
        }
      }
      break;
    case BauKind::unoptimized:
      lp.sense = Sense::maximize;
      for (int n = 0; n < layout.n_transactions; ++n) {
        for (int t = 0; t < layout.n_steps; ++t) {
          lp.objective[layout.energy_index(n, t)] = 1.0;
        }
      }
      break;
  }
}

Schedule schedule_bau(std::span<const Transaction> transactions, const TimeGrid& grid,
                      const BauStrategy& strategy, const SolveOptions& options) {
  strategy.validate();
  check_instance(transactions, grid);

  Schedule schedule;
  schedule.grid = grid;
  schedule.strategy = strategy;
  schedule.transactions.assign(transactions.begin(), transactions.end());
  schedule.power.assign(transactions.size() * std::size_t(grid.n_steps), 0.0);
  schedule.energy.assign(transactions.size() * std::size_t(grid.n_steps + 1), 0.0);
  if (transactions.empty()) return schedule;

  auto [lp, layout] = build_feasibility(transactions, grid);
  apply_bau_objective(lp, layout, transactions, grid, strategy);

  const Solution sol = solve(lp, options);
  if (sol.status != SolveStatus::optimal) {
    throw InternalError("BAU dispatch solve failed: " + to_string(sol.status) +
                        (sol.message.empty() ? "" : " (" + sol.message + ")"));
  }
  for (int n = 0; n < layout.n_transactions; ++n) {
    for (int t = 0; t < grid.n_steps; ++t) {
      schedule.power_kw(n, t) = sol.values[layout.power_index(n, t)];
    }
    for (int t = 0; t <= grid.n_steps; ++t) {
      schedule.energy_kwh(n, t) = sol.values[layout.energy_index(n, t)];
    }
  }
  return schedule;
}

std::vector<double> aggregate_profile(const Schedule& schedule) {
  std::vector<double> agg(static_cast<std::size_t>(schedule.grid.n_steps), 0.0);
  for (int n = 0; n < schedule.n_transactions(); ++n) {
    for (int t = 0; t < schedule.grid.n_steps; ++t) {
      agg[static_cast<std::size_t>(t)] += schedule.power_kw(n, t);
    }
  }
  return agg;
}

double schedule_cost(const Schedule& schedule, const Signal& signal) {
  const double dt = schedule.grid.dt_hours();
  double cost = 0.0;
  for (int n = 0; n < schedule.n_transactions(); ++n) {
    const Transaction& tx = schedule.transactions[n];
    for (int t = tx.arrive_step; t < tx.depart_step; ++t) {
      cost += signal.at(t) * schedule.power_kw(n, t) * dt;
    }
  }
  return cost;
}

void write_schedule_csv(std::ostream& out, const Schedule& schedule) {
  out << "transaction_id,step,power_kw\n";
  char buf[64];
  for (int n = 0; n < schedule.n_transactions(); ++n) {
    for (int t = 0; t < schedule.grid.n_steps; ++t) {
      const double p = schedule.power_kw(n, t);
      if (p == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", schedule.transactions[n].id, t, p);
      out << buf;
    }
  }
}

}  // namespace flexcast
