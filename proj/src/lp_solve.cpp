#include <algorithm>
#include <cmath>
#include <numeric>

#include "flexcast/lp.hpp"
#include "presolve.hpp"
#include "simplex.hpp"

namespace flexcast {

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);  // keep the smaller index as root
    parent[a] = b;
  }
};

double bound_violation(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

}  // namespace

Solution solve(const LinearProgram& lp, const SolveOptions& options) {
  lp.validate();

  Solution sol;
  LinearProgram work;
  const LinearProgram* input = &lp;
  if (lp.sense == Sense::maximize) {
    work = lp;
    work.sense = Sense::minimize;
    for (double& c : work.objective) c = -c;
    input = &work;
  }

  detail::PresolveOutcome pre = detail::presolve(*input, options);
  if (pre.status != SolveStatus::optimal) {
    sol.status = pre.status;
    sol.message = pre.message;
    return sol;
  }

  const detail::ReducedProblem& red = pre.reduced;
  const int nr = static_cast<int>(red.var_ids.size());
  std::vector<double> reduced_values(nr, 0.0);

  if (nr > 0 && !red.rows.empty()) {
    UnionFind uf(nr);
    for (const Row& row : red.rows) {
      for (std::size_t k = 1; k < row.terms.size(); ++k) {
        uf.unite(row.terms[0].first, row.terms[k].first);
      }
    }
    // group variables and rows into independent blocks, ordered by root index
    std::vector<int> block_of(nr, -1);
    std::vector<std::vector<int>> block_vars;
    for (int j = 0; j < nr; ++j) {
      const int root = uf.find(j);
      if (block_of[root] < 0) {
        block_of[root] = static_cast<int>(block_vars.size());
        block_vars.emplace_back();
      }
      block_of[j] = block_of[root];
      block_vars[block_of[j]].push_back(j);
    }
    const int n_blocks = static_cast<int>(block_vars.size());
    std::vector<std::vector<int>> block_rows(n_blocks);
    for (int r = 0; r < static_cast<int>(red.rows.size()); ++r) {
      block_rows[block_of[red.rows[r].terms[0].first]].push_back(r);
    }

    std::vector<int> local_index(nr, -1);
    for (int b = 0; b < n_blocks; ++b) {
      detail::BlockProblem prob;
      const auto& vars = block_vars[b];
      for (std::size_t k = 0; k < vars.size(); ++k) {
        local_index[vars[k]] = static_cast<int>(k);
        prob.lower.push_back(red.lower[vars[k]]);
        prob.upper.push_back(red.upper[vars[k]]);
        prob.objective.push_back(red.objective[vars[k]]);
      }
      prob.lazy.assign(block_rows[b].size(), 0);
      for (std::size_t k = 0; k < block_rows[b].size(); ++k) {
        const Row& src = red.rows[block_rows[b][k]];
        Row row;
        row.lo = src.lo;
        row.hi = src.hi;
        // inequalities over box-bounded variables can be activated lazily
        bool lazy_eligible = !src.is_equality();
        for (const auto& [var, coef] : src.terms) {
          row.terms.emplace_back(local_index[var], coef);
          if (red.lower[var] == -kInf || red.upper[var] == kInf) lazy_eligible = false;
        }
        prob.lazy[k] = lazy_eligible ? 1 : 0;
        prob.rows.push_back(std::move(row));
      }

      detail::BlockResult res = detail::solve_block(prob, options);
      sol.iterations += res.iterations;
      if (res.status != SolveStatus::optimal) {
        sol.status = res.status;
        sol.message = "block " + std::to_string(b) + ": " + res.message;
        return sol;
      }
      for (std::size_t k = 0; k < vars.size(); ++k) reduced_values[vars[k]] = res.x[k];
    }
  }

  sol.values = detail::postsolve(pre, reduced_values);

  // verify against the original program and report the true objective
  double residual = 0.0;
  std::string worst;
  for (int j = 0; j < lp.n_vars(); ++j) {
    const double v = bound_violation(sol.values[j], lp.lower[j], lp.upper[j]);
    if (v > residual) {
      residual = v;
      worst = "bound of variable " + std::to_string(j);
    }
  }
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const Row& row = lp.rows[r];
    double act = 0.0;
    for (const auto& [var, coef] : row.terms) act += coef * sol.values[var];
    const double v = bound_violation(act, row.lo, row.hi);
    if (v > residual) {
      residual = v;
      worst = "row " + std::to_string(r);
    }
  }
  sol.max_residual = residual;

  double obj = lp.objective_constant;
  for (int j = 0; j < lp.n_vars(); ++j) obj += lp.objective[j] * sol.values[j];
  sol.objective_value = obj;

  if (residual > options.residual_limit) {
    sol.status = SolveStatus::error;
    sol.message =
        "solution residual " + std::to_string(residual) + " exceeds limit at " + worst;
  } else {
    sol.status = SolveStatus::optimal;
  }
  return sol;
}

}  // namespace flexcast
