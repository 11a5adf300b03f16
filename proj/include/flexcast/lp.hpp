#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flexcast/time_grid.hpp"
#include "flexcast/transactions.hpp"

namespace flexcast {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Index maps for the scheduling variables. Power p(n,t) acts during step t;
// energy e(n,t) is the cumulative energy delivered before step t, so e has
// one more time index than p. An optional scalar product variable (the
// redispatch or capacity-limitation magnitude) sits at the end.
struct VariableLayout {
  int n_transactions = 0;
  int n_steps = 0;
  bool has_product = false;

  int power_index(int n, int t) const { return n * n_steps + t; }
  int energy_index(int n, int t) const {
    return n_transactions * n_steps + n * (n_steps + 1) + t;
  }
  int product_index() const {
    return n_transactions * n_steps + n_transactions * (n_steps + 1);
  }
  int total_variables() const { return product_index() + (has_product ? 1 : 0); }

  bool is_power(int var) const { return var < n_transactions * n_steps; }
  std::string variable_name(int var) const;
};

enum class Sense { minimize, maximize };

// lo <= sum(coef * x) <= hi; equality rows have lo == hi.
struct Row {
  std::vector<std::pair<int, double>> terms;
  double lo = -kInf;
  double hi = kInf;

  bool is_equality() const { return lo == hi; }
};

struct LinearProgram {
  Sense sense = Sense::minimize;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<Row> rows;

  int n_vars() const { return static_cast<int>(lower.size()); }

  int add_variable(double lo, double hi, double obj = 0.0);
  void add_row(Row row);
  void add_le(std::vector<std::pair<int, double>> terms, double hi);
  void add_ge(std::vector<std::pair<int, double>> terms, double lo);
  void add_eq(std::vector<std::pair<int, double>> terms, double rhs);
  void fix_variable(int var, double value);

  // Throws InternalError on out-of-range variable references, crossed or NaN
  // bounds, or duplicate terms within a row.
  void validate() const;

  // CPLEX LP text format, for cross-checking against external solvers.
  void write_lp_format(std::ostream& out, const VariableLayout* layout = nullptr) const;
};

enum class SolveStatus { optimal, infeasible, unbounded, error };

std::string to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::error;
  double objective_value = 0.0;
  std::vector<double> values;
  double max_residual = 0.0;  // worst violation of the original rows/bounds
  long iterations = 0;
  std::string message;
};

struct SolveOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-9;
  // Residual threshold above which an "optimal" basis is reported as an
  // error instead.
  double residual_limit = 1e-6;
  // Blocks with more rows than this activate finite-bound inequality rows
  // lazily (only when violated).
  int lazy_row_threshold = 600;
  long iteration_limit = 0;  // 0 = automatic
};

// Feasibility polytope shared by every scheduling problem. For each
// transaction n with connection [a, d):
//   e(n,t) = 0                          t <= a        (as fixed bounds)
//   e(n,t) = e(n,t-1) + p(n,t-1) * dt   a < t <= d    (chain rows; the t = d
//                                                      row ties the delivered
//                                                      energy to the target)
//   e(n,t) = energy_kwh                 t >= d        (as fixed bounds)
//   p(n,t) = 0                          t < a or t >= d
//   p_min <= p(n,t) <= p_max            a <= t < d
//   0 <= e(n,t) <= energy_kwh  (SOC floor and historical-volume cap)
// No objective is set; callers add one.
struct FeasibilityLp {
  LinearProgram lp;
  VariableLayout layout;
};

FeasibilityLp build_feasibility(std::span<const Transaction> transactions, const TimeGrid& grid);

// Deterministic: identical inputs give bit-identical solutions across runs.
Solution solve(const LinearProgram& lp, const SolveOptions& options = {});

}  // namespace flexcast
