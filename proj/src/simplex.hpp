#pragma once

// Bounded-variable two-phase primal simplex on a dense Eigen LU basis with
// product-form updates. Sized for the post-presolve problems this project
// generates (hundreds of rows); determinism matters more than raw speed, so
// pricing is plain Dantzig with fixed tie-breaking and a Bland fallback.
//
// Rows marked lazy (finite-bound inequalities) are activated only when the
// relaxed optimum or an unbounded ray violates them. The V2G state-of-charge
// prefix rows are the main client: few of them bind at an optimum.

#include <string>
#include <vector>

#include "flexcast/lp.hpp"

namespace flexcast::detail {

struct BlockProblem {
  std::vector<double> lower, upper, objective;  // minimize
  std::vector<Row> rows;                        // local variable indices
  std::vector<char> lazy;                       // per row; may be empty
};

struct BlockResult {
  SolveStatus status = SolveStatus::error;
  std::vector<double> x;
  long iterations = 0;
  std::string message;
};

BlockResult solve_block(const BlockProblem& problem, const SolveOptions& options);

}  // namespace flexcast::detail
