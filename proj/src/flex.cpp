#include "flexcast/flex.hpp"

#include <cmath>
#include <limits>

namespace flexcast {

FlexProduct parse_flex_product(const std::string& text) {
  if (text == "redispatch") return FlexProduct::redispatch;
  if (text == "caplimit") return FlexProduct::capacity_limitation;
  throw ParseError("unknown product '" + text + "', expected redispatch|caplimit");
}

std::string to_string(FlexProduct p) {
  return p == FlexProduct::redispatch ? "redispatch" : "caplimit";
}

void FlexRequest::validate(const TimeGrid& grid) const {
  if (window_len_steps < 1) throw ConfigError("flexibility window must cover at least one step");
  if (window_start_step < grid.anchor_day_begin() ||
      window_start_step + window_len_steps > grid.anchor_day_end()) {
    throw ConfigError("flexibility window must lie within the sample day");
  }
  if (lead_time_hours <= 0.0) throw ConfigError("lead time must be positive");
  const double steps = lead_time_hours / grid.dt_hours();
  if (std::abs(steps - std::round(steps)) > 1e-9) {
    throw ConfigError("lead time must be a multiple of the 15-minute step");
  }
}

int freeze_step(const FlexRequest& request, const TimeGrid& grid) {
  const int lead_steps = static_cast<int>(std::llround(request.lead_time_hours / grid.dt_hours()));
  return std::max(0, request.window_start_step - lead_steps);
}

namespace {

struct StageResult {
  Solution solution;
  VariableLayout layout;
};

[[noreturn]] void stage_failure(const char* stage, const Solution& sol) {
  throw InternalError(std::string("flexibility ") + stage + " solve failed: " +
                      to_string(sol.status) + (sol.message.empty() ? "" : " (" + sol.message + ")"));
}

FlexResult solve_product(const Schedule& bau, std::span<const Transaction> transactions,
                         const FlexRequest& request, const Signal* price, const Signal* mef,
                         const SolveOptions& options) {
  const TimeGrid& grid = bau.grid;
  request.validate(grid);
  if (static_cast<int>(transactions.size()) != bau.n_transactions()) {
    throw ConfigError("transaction list does not match the BAU schedule");
  }
  for (int n = 0; n < bau.n_transactions(); ++n) {
    if (!(transactions[n] == bau.transactions[n])) {
      throw ConfigError("transaction list does not match the BAU schedule");
    }
    if (transactions[n].is_v2g() != request.v2g) {
      throw ConfigError("request v2g flag does not match the transactions");
    }
  }

  const int w_begin = request.window_start_step;
  const int w_end = w_begin + request.window_len_steps;
  const int activation = freeze_step(request, grid);
  const bool redispatch = request.product == FlexProduct::redispatch;

  // Transactions never connected during the window cannot move the window
  // aggregate; they keep their baseline schedule. Their per-transaction BAU
  // plan is already optimal for the secondary objective, so pinning them
  // preserves stage-2 optimality.
  std::vector<int> free_ids;
  for (int n = 0; n < bau.n_transactions(); ++n) {
    const Transaction& tx = bau.transactions[n];
    if (tx.arrive_step < w_end && tx.depart_step > w_begin) free_ids.push_back(n);
  }
  std::vector<Transaction> free_txs;
  free_txs.reserve(free_ids.size());
  for (int n : free_ids) free_txs.push_back(bau.transactions[n]);

  auto [lp, layout] = build_feasibility(free_txs, grid);
  layout.has_product = true;
  const int c_var = lp.add_variable(redispatch ? -kInf : 0.0, kInf);

  // pre-activation freeze
  for (std::size_t k = 0; k < free_ids.size(); ++k) {
    const Transaction& tx = free_txs[k];
    for (int t = tx.arrive_step; t < std::min(tx.depart_step, activation); ++t) {
      lp.fix_variable(layout.power_index(static_cast<int>(k), t),
                      bau.power_kw(free_ids[k], t));
    }
  }

  // window rows; the baseline of the pinned transactions moves to the RHS
  for (int t = w_begin; t < w_end; ++t) {
    double free_baseline = 0.0;
    for (std::size_t k = 0; k < free_ids.size(); ++k) {
      free_baseline += bau.power_kw(free_ids[k], t);
    }
    double pinned_baseline = 0.0;
    for (int n = 0; n < bau.n_transactions(); ++n) pinned_baseline += bau.power_kw(n, t);
    pinned_baseline -= free_baseline;

    Row row;
    for (std::size_t k = 0; k < free_ids.size(); ++k) {
      const Transaction& tx = free_txs[k];
      if (t >= tx.arrive_step && t < tx.depart_step) {
        row.terms.emplace_back(layout.power_index(static_cast<int>(k), t), 1.0);
      }
    }
    if (redispatch) {
      row.terms.emplace_back(c_var, 1.0);
      row.hi = free_baseline;
    } else {
      row.terms.emplace_back(c_var, -1.0);
      row.hi = -pinned_baseline;
    }
    lp.add_row(std::move(row));
  }

  // stage 1: optimize the product magnitude
  lp.sense = redispatch ? Sense::maximize : Sense::minimize;
  lp.objective.assign(lp.n_vars(), 0.0);
  lp.objective[c_var] = 1.0;
  Solution stage1 = solve(lp, options);
  if (stage1.status != SolveStatus::optimal) stage_failure("magnitude", stage1);
  const double magnitude = stage1.values[c_var];
  if (redispatch && magnitude < -1e-6) {
    throw InternalError("negative redispatch magnitude " + std::to_string(magnitude) +
                        "; the BAU schedule should always be feasible at c = 0");
  }

  // stage 2: the BAU objective breaks ties among magnitude-optimal schedules
  const double slack = 1e-9 * std::max(1.0, std::abs(magnitude));
  if (redispatch) {
    lp.lower[c_var] = magnitude - slack;
    lp.upper[c_var] = magnitude;
  } else {
    lp.lower[c_var] = magnitude;
    lp.upper[c_var] = magnitude + slack;
  }
  lp.objective.assign(lp.n_vars(), 0.0);
  apply_bau_objective(lp, layout, free_txs, grid, bau.strategy);
  Solution stage2 = solve(lp, options);
  if (stage2.status != SolveStatus::optimal) stage_failure("tiebreak", stage2);

  FlexResult result;
  result.magnitude_kw = redispatch ? std::max(0.0, magnitude) : magnitude;
  result.status = stage2.status;
  result.adjusted = bau;  // pinned transactions keep the baseline bit-exactly
  for (std::size_t k = 0; k < free_ids.size(); ++k) {
    const int n = free_ids[k];
    for (int t = 0; t < grid.n_steps; ++t) {
      result.adjusted.power_kw(n, t) = stage2.values[layout.power_index(static_cast<int>(k), t)];
    }
    for (int t = 0; t <= grid.n_steps; ++t) {
      result.adjusted.energy_kwh(n, t) =
          stage2.values[layout.energy_index(static_cast<int>(k), t)];
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.cost_delta =
      price ? schedule_cost(result.adjusted, *price) - schedule_cost(bau, *price) : nan;
  result.emission_delta =
      mef ? schedule_cost(result.adjusted, *mef) - schedule_cost(bau, *mef) : nan;
  return result;
}

}  // namespace

FlexResult solve_redispatch(const Schedule& bau, std::span<const Transaction> transactions,
                            const FlexRequest& request, const Signal* price, const Signal* mef,
                            const SolveOptions& options) {
  if (request.product != FlexProduct::redispatch) {
    throw ConfigError("solve_redispatch called with a non-redispatch request");
  }
  return solve_product(bau, transactions, request, price, mef, options);
}

FlexResult solve_capacity_limit(const Schedule& bau, std::span<const Transaction> transactions,
                                const FlexRequest& request, const Signal* price,
                                const Signal* mef, const SolveOptions& options) {
  if (request.product != FlexProduct::capacity_limitation) {
    throw ConfigError("solve_capacity_limit called with a non-caplimit request");
  }
  return solve_product(bau, transactions, request, price, mef, options);
}

}  // namespace flexcast
