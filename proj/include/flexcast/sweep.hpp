#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flexcast/flex.hpp"
#include "flexcast/synth.hpp"

namespace flexcast {

// Cross product of the experiment dimensions, evaluated per sample date.
// Failures are isolated per cell: a failing cell contributes a row with an
// error status, never an aborted sweep.
struct SweepConfig {
  std::vector<CivilDate> dates;
  std::vector<std::string> categories = {"all"};  // "all" or a category name
  std::vector<BauKind> strategies;
  std::vector<FlexProduct> products;
  std::vector<double> lead_times_h;
  std::vector<int> window_start_minutes;  // minutes after midnight
  std::vector<double> window_lens_h;
  std::vector<bool> v2g_flags = {false};

  std::string transactions_csv;  // exactly one of this and fleet_spec_path
  std::string fleet_spec_path;
  std::string price_csv;
  std::string mef_csv;
  std::string out_csv;  // optional; sidecar written next to it
  int workers = 0;      // 0 = hardware concurrency

  void validate() const;
};

SweepConfig load_sweep_config(std::istream& json_in);

struct ResultRow {
  CivilDate date;
  std::string category;
  FlexProduct product = FlexProduct::redispatch;
  BauKind bau = BauKind::unoptimized;
  bool v2g = false;
  int window_start_minutes = 0;
  double window_len_h = 0.0;
  double lead_h = 0.0;
  double magnitude_kw = 0.0;
  double cost_delta = 0.0;
  double emission_delta = 0.0;
  std::string status;
};

struct SweepOutput {
  std::vector<ResultRow> rows;
  int n_failed = 0;
  std::string config_hash;
};

// Runs the sweep (in parallel across dates) and, when out_csv is set, writes
// the result CSV plus a JSON metadata sidecar. Output is deterministic:
// identical config and inputs give identical bytes at any worker count.
SweepOutput run_sweep(const SweepConfig& config);

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct SummaryRow {
  std::vector<std::string> group;  // one value per group-by key
  long count = 0;                  // rows with optimal status
  double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  double paired_delta_23h_minus_1h = 0.0;  // NaN when either lead is absent
};

// Statistics of magnitude_kw grouped by the given keys (date, category,
// product, bau, v2g, window_start, window_len, lead_h). The paired delta is
// the mean of c(23 h) - c(1 h) over cells present at both lead times.
std::vector<SummaryRow> summarize(std::span<const ResultRow> rows,
                                  const std::vector<std::string>& group_keys);

void write_summary_csv(std::ostream& out, const std::vector<std::string>& group_keys,
                       std::span<const SummaryRow> rows);

}  // namespace flexcast
