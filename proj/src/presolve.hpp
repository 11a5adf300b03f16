#pragma once

// LP presolve: shrinks a LinearProgram to the part that actually needs a
// simplex run. Passes:
//   1. fixed-variable elimination (lower == upper)
//   2. empty/singleton rows -> infeasibility checks and bound tightening
//   3. equality substitution along chains: a variable that appears in exactly
//      one other row, that row also an equality, is eliminated; its bounds
//      fold into the source row, which turns into a range row. This collapses
//      the cumulative-energy chains into prefix-sum rows over power variables.
//   4. redundant range rows: dropped when variable bounds, or the residual of
//      a proportional superset equality row, already imply the row.
// Everything is deterministic; substitutions are recorded for postsolve.

#include <string>
#include <vector>

#include "flexcast/lp.hpp"

namespace flexcast::detail {

struct Substitution {
  int var = 0;
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;  // original variable ids
};

struct ReducedProblem {
  std::vector<int> var_ids;  // original id per reduced index
  std::vector<double> lower, upper, objective;
  std::vector<Row> rows;  // reduced indices
};

struct PresolveOutcome {
  SolveStatus status = SolveStatus::optimal;
  std::string message;
  ReducedProblem reduced;
  std::vector<Substitution> substitutions;  // play back in reverse
  std::vector<double> var_value;            // full size; valid where resolved
  std::vector<char> resolved;               // fixed or directly assigned
};

// `lp` must be minimize-normalized and validated.
PresolveOutcome presolve(const LinearProgram& lp, const SolveOptions& options);

std::vector<double> postsolve(const PresolveOutcome& outcome,
                              const std::vector<double>& reduced_values);

}  // namespace flexcast::detail
