#pragma once

#include <string>

#include "flexcast/bau.hpp"

namespace flexcast {

enum class FlexProduct { redispatch, capacity_limitation };

FlexProduct parse_flex_product(const std::string& text);  // "redispatch" | "caplimit"
std::string to_string(FlexProduct p);

// A congestion-product request: deliver during the window (which must lie
// inside the sample day), announced lead_time_hours before the window starts.
// The schedule before the activation step is frozen to BAU.
struct FlexRequest {
  FlexProduct product = FlexProduct::redispatch;
  int window_start_step = 0;
  int window_len_steps = 0;
  double lead_time_hours = 0.0;
  bool v2g = false;

  void validate(const TimeGrid& grid) const;
  // True when the lead time falls in the 1..23 h range the products cover;
  // other values solve fine but are flagged by callers.
  bool lead_time_in_studied_range() const {
    return lead_time_hours >= 1.0 && lead_time_hours <= 23.0;
  }
};

// Activation step a*: schedule steps strictly before it are frozen to the
// BAU plan. a* = window_start - lead/dt, clamped at the grid start.
int freeze_step(const FlexRequest& request, const TimeGrid& grid);

struct FlexResult {
  double magnitude_kw = 0.0;  // c^r (redispatch) or c^l (capacity limitation)
  Schedule adjusted;
  SolveStatus status = SolveStatus::error;
  double cost_delta = 0.0;      // EUR, adjusted minus BAU; NaN without prices
  double emission_delta = 0.0;  // kgCO2; NaN without an MEF signal
};

// Largest uniform reduction c^r of the aggregate power below the BAU
// aggregate sustainable throughout the window:
//   sum_n p(n,t) <= sum_n bau(n,t) - c^r   for every window step t,
// subject to the feasibility polytope and the pre-activation freeze. Solved
// in two stages: the magnitude first, then the BAU objective as a tiebreak
// over magnitude-optimal schedules.
FlexResult solve_redispatch(const Schedule& bau, std::span<const Transaction> transactions,
                            const FlexRequest& request, const Signal* price, const Signal* mef,
                            const SolveOptions& options = {});

// Smallest aggregate cap c^l >= 0 the fleet can respect throughout the
// window: sum_n p(n,t) <= c^l for every window step t.
FlexResult solve_capacity_limit(const Schedule& bau, std::span<const Transaction> transactions,
                                const FlexRequest& request, const Signal* price,
                                const Signal* mef, const SolveOptions& options = {});

}  // namespace flexcast
