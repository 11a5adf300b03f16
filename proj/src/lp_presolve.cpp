#include "presolve.hpp"

#include <algorithm>
#include <cmath>

namespace flexcast::detail {

namespace {

constexpr double kTinyCoef = 1e-12;

struct Work {
  const SolveOptions* opts = nullptr;
  int n = 0;
  std::vector<double> lo, up, obj;
  std::vector<Row> rows;
  std::vector<char> row_alive;
  std::vector<char> var_alive;
  std::vector<double> value;
  std::vector<char> resolved;
  std::vector<Substitution> substitutions;
  std::vector<std::vector<int>> var_rows;

  // epoch-stamped dense scratch for term merging / subset tests
  std::vector<double> coef_a;
  std::vector<int> stamp_a;
  std::vector<int> stamp_b;
  int epoch_a = 0;
  int epoch_b = 0;

  SolveStatus status = SolveStatus::optimal;
  std::string message;

  bool failed() const { return status != SolveStatus::optimal; }

  void set_infeasible(std::string why) {
    status = SolveStatus::infeasible;
    message = std::move(why);
  }

  void rebuild_incidence() {
    for (auto& v : var_rows) v.clear();
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (!row_alive[r]) continue;
      for (const auto& [var, coef] : rows[r].terms) {
        (void)coef;
        var_rows[var].push_back(r);
      }
    }
  }

  void drop_row(int r) {
    row_alive[r] = 0;
    for (const auto& [var, coef] : rows[r].terms) {
      (void)coef;
      auto& list = var_rows[var];
      list.erase(std::remove(list.begin(), list.end(), r), list.end());
    }
    rows[r].terms.clear();
  }
};

bool fix_variable(Work& w, int var, double val) {
  w.var_alive[var] = 0;
  w.resolved[var] = 1;
  w.value[var] = val;
  for (int r : w.var_rows[var]) {
    Row& row = w.rows[r];
    for (std::size_t k = 0; k < row.terms.size(); ++k) {
      if (row.terms[k].first == var) {
        const double move = row.terms[k].second * val;
        if (row.lo > -kInf) row.lo -= move;
        if (row.hi < kInf) row.hi -= move;
        row.terms.erase(row.terms.begin() + static_cast<std::ptrdiff_t>(k));
        break;
      }
    }
  }
  w.var_rows[var].clear();
  return true;
}

bool pass_fixed_variables(Work& w) {
  bool changed = false;
  for (int j = 0; j < w.n && !w.failed(); ++j) {
    if (!w.var_alive[j]) continue;
    if (w.lo[j] == w.up[j]) {
      fix_variable(w, j, w.lo[j]);
      changed = true;
    } else if (w.lo[j] > w.up[j]) {
      if (w.lo[j] - w.up[j] > 1e-7 * std::max({1.0, std::abs(w.lo[j]), std::abs(w.up[j])})) {
        w.set_infeasible("variable " + std::to_string(j) + " has crossed bounds [" +
                         std::to_string(w.lo[j]) + ", " + std::to_string(w.up[j]) + "]");
      } else {
        fix_variable(w, j, 0.5 * (w.lo[j] + w.up[j]));
        changed = true;
      }
    }
  }
  return changed;
}

// Empty and singleton rows; drops zero coefficients.
bool pass_simple_rows(Work& w) {
  bool changed = false;
  const double ftol = w.opts->feasibility_tol;
  for (int r = 0; r < static_cast<int>(w.rows.size()) && !w.failed(); ++r) {
    if (!w.row_alive[r]) continue;
    Row& row = w.rows[r];
    for (std::size_t k = row.terms.size(); k-- > 0;) {
      if (row.terms[k].second == 0.0) {
        const int var = row.terms[k].first;
        auto& list = w.var_rows[var];
        list.erase(std::remove(list.begin(), list.end(), r), list.end());
        row.terms.erase(row.terms.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
      }
    }
    if (row.terms.empty()) {
      if (row.lo > ftol || row.hi < -ftol) {
        w.set_infeasible("row " + std::to_string(r) + " reduced to " + std::to_string(row.lo) +
                         " <= 0 <= " + std::to_string(row.hi));
      } else {
        w.drop_row(r);
        changed = true;
      }
      continue;
    }
    if (row.terms.size() == 1) {
      const auto [var, coef] = row.terms.front();
      if (std::abs(coef) <= kTinyCoef) continue;
      double nl = -kInf, nu = kInf;
      if (coef > 0.0) {
        if (row.lo > -kInf) nl = row.lo / coef;
        if (row.hi < kInf) nu = row.hi / coef;
      } else {
        if (row.hi < kInf) nl = row.hi / coef;
        if (row.lo > -kInf) nu = row.lo / coef;
      }
      if (nl > w.lo[var]) w.lo[var] = nl;
      if (nu < w.up[var]) w.up[var] = nu;
      w.drop_row(r);
      changed = true;
    }
  }
  return changed;
}

// Merges `terms_in` scaled by `scale` into row's terms using the scratch.
void merge_into_row(Work& w, Row& row, int row_id,
                    const std::vector<std::pair<int, double>>& terms_in, double scale) {
  ++w.epoch_a;
  std::vector<int> order;
  order.reserve(row.terms.size() + terms_in.size());
  for (const auto& [var, coef] : row.terms) {
    w.coef_a[var] = coef;
    w.stamp_a[var] = w.epoch_a;
    order.push_back(var);
  }
  for (const auto& [var, coef] : terms_in) {
    if (w.stamp_a[var] != w.epoch_a) {
      w.coef_a[var] = 0.0;
      w.stamp_a[var] = w.epoch_a;
      order.push_back(var);
      w.var_rows[var].push_back(row_id);
    }
    w.coef_a[var] += scale * coef;
  }
  row.terms.clear();
  for (int var : order) {
    const double coef = w.coef_a[var];
    if (coef == 0.0) {
      auto& list = w.var_rows[var];
      list.erase(std::remove(list.begin(), list.end(), row_id), list.end());
      continue;
    }
    row.terms.emplace_back(var, coef);
  }
}

// Equality-chain substitution. Candidate: a variable of an equality row that
// appears in exactly one other alive row, itself an equality. Folding the
// variable's bounds turns the source row into a range row over the remaining
// terms, and the definition cascades into the other row.
bool pass_substitute(Work& w) {
  bool changed = false;
  for (int r = 0; r < static_cast<int>(w.rows.size()) && !w.failed(); ++r) {
    if (!w.row_alive[r]) continue;
    Row& row = w.rows[r];
    if (!row.is_equality() || row.lo == -kInf || row.terms.size() < 2) continue;

    double max_coef = 0.0;
    for (const auto& [var, coef] : row.terms) {
      (void)var;
      max_coef = std::max(max_coef, std::abs(coef));
    }
    int pick = -1, other_row = -1;
    double pick_coef = 0.0;
    for (const auto& [var, coef] : row.terms) {
      if (std::abs(coef) < 1e-7 * max_coef) continue;
      const auto& list = w.var_rows[var];
      if (list.size() != 2) continue;
      const int other = list[0] == r ? list[1] : list[0];
      if (other == r || !w.row_alive[other] || !w.rows[other].is_equality()) continue;
      if (pick < 0 || var < pick) {
        pick = var;
        other_row = other;
        pick_coef = coef;
      }
    }
    if (pick < 0) continue;

    const double rhs = row.lo;
    Substitution sub;
    sub.var = pick;
    sub.constant = rhs / pick_coef;
    for (const auto& [var, coef] : row.terms) {
      if (var != pick) sub.terms.emplace_back(var, -coef / pick_coef);
    }

    // source row keeps the remaining terms; bounds fold from the variable
    {
      auto& list = w.var_rows[pick];
      list.clear();
      for (std::size_t k = 0; k < row.terms.size(); ++k) {
        if (row.terms[k].first == pick) {
          row.terms.erase(row.terms.begin() + static_cast<std::ptrdiff_t>(k));
          break;
        }
      }
      const double bl = w.lo[pick], bu = w.up[pick];
      if (pick_coef > 0.0) {
        row.lo = bu < kInf ? rhs - pick_coef * bu : -kInf;
        row.hi = bl > -kInf ? rhs - pick_coef * bl : kInf;
      } else {
        row.lo = bl > -kInf ? rhs - pick_coef * bl : -kInf;
        row.hi = bu < kInf ? rhs - pick_coef * bu : kInf;
      }
      if (row.lo == -kInf && row.hi == kInf) w.drop_row(r);
    }

    // cascade the definition into the one other row
    {
      Row& o = w.rows[other_row];
      double g = 0.0;
      for (std::size_t k = 0; k < o.terms.size(); ++k) {
        if (o.terms[k].first == pick) {
          g = o.terms[k].second;
          o.terms.erase(o.terms.begin() + static_cast<std::ptrdiff_t>(k));
          break;
        }
      }
      if (g != 0.0) {
        if (o.lo > -kInf) o.lo -= g * sub.constant;
        if (o.hi < kInf) o.hi -= g * sub.constant;
        merge_into_row(w, o, other_row, sub.terms, g);
      }
    }

    // objective rewrite
    if (w.obj[pick] != 0.0) {
      const double cj = w.obj[pick];
      for (const auto& [var, coef] : sub.terms) w.obj[var] += cj * coef;
      w.obj[pick] = 0.0;
      // constant cj * sub.constant folds into the recomputed objective later
    }

    w.var_alive[pick] = 0;
    w.substitutions.push_back(std::move(sub));
    changed = true;
  }
  return changed;
}

// Activity bounds of a term list from variable bounds.
void direct_activity(const Work& w, const std::vector<std::pair<int, double>>& terms,
                     double& act_lo, double& act_hi) {
  act_lo = 0.0;
  act_hi = 0.0;
  for (const auto& [var, coef] : terms) {
    const double a = coef > 0.0 ? w.lo[var] : w.up[var];
    const double b = coef > 0.0 ? w.up[var] : w.lo[var];
    act_lo = act_lo == -kInf || a == -kInf || a == kInf ? -kInf : act_lo + coef * a;
    act_hi = act_hi == kInf || b == kInf || b == -kInf ? kInf : act_hi + coef * b;
  }
}

// Redundant range rows: implied directly by variable bounds, or by the
// residual of a proportional superset equality row (e.g. a prefix-sum row
// against the total-energy equality of the same transaction).
bool pass_redundant(Work& w) {
  bool changed = false;
  for (int r = 0; r < static_cast<int>(w.rows.size()); ++r) {
    if (!w.row_alive[r]) continue;
    Row& row = w.rows[r];
    if (row.is_equality() || row.terms.empty()) continue;

    double act_lo, act_hi;
    direct_activity(w, row.terms, act_lo, act_hi);

    if (act_lo < row.lo || act_hi > row.hi) {
      // try residual implication through an equality row with superset support
      ++w.epoch_b;
      for (const auto& [var, coef] : row.terms) {
        (void)coef;
        w.stamp_b[var] = w.epoch_b;
      }
      const int v0 = row.terms.front().first;
      std::vector<int> candidates = w.var_rows[v0];
      std::sort(candidates.begin(), candidates.end());
      for (int e : candidates) {
        if (e == r || !w.row_alive[e]) continue;
        const Row& eq = w.rows[e];
        if (!eq.is_equality() || eq.lo == -kInf || eq.terms.size() < row.terms.size()) continue;

        ++w.epoch_a;
        for (const auto& [var, coef] : eq.terms) {
          w.coef_a[var] = coef;
          w.stamp_a[var] = w.epoch_a;
        }
        double sigma = 0.0;
        bool proportional = true;
        for (const auto& [var, coef] : row.terms) {
          if (w.stamp_a[var] != w.epoch_a) {
            proportional = false;
            break;
          }
          const double ratio = coef / w.coef_a[var];
          if (sigma == 0.0) {
            sigma = ratio;
          } else if (std::abs(ratio - sigma) > 1e-12 * std::max(1.0, std::abs(sigma))) {
            proportional = false;
            break;
          }
        }
        if (!proportional || sigma == 0.0) continue;

        // activity(row) = sigma*rhs - sum over E\R of sigma*coef*x
        double res_lo = 0.0, res_hi = 0.0;  // range of the subtracted sum
        for (const auto& [var, coef] : eq.terms) {
          if (w.stamp_b[var] == w.epoch_b) continue;  // in R's support
          const double q = sigma * coef;
          const double a = q > 0.0 ? w.lo[var] : w.up[var];
          const double b = q > 0.0 ? w.up[var] : w.lo[var];
          res_lo = res_lo == -kInf || std::abs(a) == kInf ? -kInf : res_lo + q * a;
          res_hi = res_hi == kInf || std::abs(b) == kInf ? kInf : res_hi + q * b;
        }
        const double imp_lo = res_hi == kInf ? -kInf : sigma * eq.lo - res_hi;
        const double imp_hi = res_lo == -kInf ? kInf : sigma * eq.lo - res_lo;
        act_lo = std::max(act_lo, imp_lo);
        act_hi = std::min(act_hi, imp_hi);
        if (act_lo >= row.lo && act_hi <= row.hi) break;
      }
    }

    const double margin_lo = 1e-12 * std::max(1.0, std::abs(row.lo));
    const double margin_hi = 1e-12 * std::max(1.0, std::abs(row.hi));
    if ((row.lo == -kInf || act_lo >= row.lo - margin_lo) &&
        (row.hi == kInf || act_hi <= row.hi + margin_hi)) {
      w.drop_row(r);
      changed = true;
    }
  }
  return changed;
}

}  // namespace

PresolveOutcome presolve(const LinearProgram& lp, const SolveOptions& options) {
  Work w;
  w.opts = &options;
  w.n = lp.n_vars();
  w.lo = lp.lower;
  w.up = lp.upper;
  w.obj = lp.objective;
  w.rows = lp.rows;
  w.row_alive.assign(w.rows.size(), 1);
  w.var_alive.assign(w.n, 1);
  w.value.assign(w.n, 0.0);
  w.resolved.assign(w.n, 0);
  w.var_rows.resize(w.n);
  w.coef_a.assign(w.n, 0.0);
  w.stamp_a.assign(w.n, 0);
  w.stamp_b.assign(w.n, 0);
  w.rebuild_incidence();

  bool changed = true;
  for (int round = 0; changed && round < 200 && !w.failed(); ++round) {
    changed = false;
    changed |= pass_fixed_variables(w);
    if (w.failed()) break;
    changed |= pass_simple_rows(w);
    if (w.failed()) break;
    changed |= pass_substitute(w);
    if (w.failed()) break;
    changed |= pass_redundant(w);
  }

  PresolveOutcome out;
  out.status = w.status;
  out.message = w.message;
  out.substitutions = std::move(w.substitutions);
  out.var_value = std::move(w.value);
  out.resolved = std::move(w.resolved);
  if (out.status != SolveStatus::optimal) return out;

  // variables in no surviving row: set directly from the objective sign
  for (int j = 0; j < w.n; ++j) {
    if (!w.var_alive[j] || !w.var_rows[j].empty()) continue;
    double v;
    if (w.obj[j] > 0.0) {
      v = w.lo[j];
    } else if (w.obj[j] < 0.0) {
      v = w.up[j];
    } else {
      v = w.lo[j] > -kInf ? w.lo[j] : (w.up[j] < kInf ? w.up[j] : 0.0);
    }
    if (v == -kInf || v == kInf) {
      out.status = SolveStatus::unbounded;
      out.message = "variable " + std::to_string(j) + " is unbounded in the objective direction";
      return out;
    }
    w.var_alive[j] = 0;
    out.resolved[j] = 1;
    out.var_value[j] = v;
  }

  // assemble the reduced problem
  std::vector<int> reduced_index(w.n, -1);
  for (int j = 0; j < w.n; ++j) {
    if (!w.var_alive[j]) continue;
    reduced_index[j] = static_cast<int>(out.reduced.var_ids.size());
    out.reduced.var_ids.push_back(j);
    out.reduced.lower.push_back(w.lo[j]);
    out.reduced.upper.push_back(w.up[j]);
    out.reduced.objective.push_back(w.obj[j]);
  }
  for (int r = 0; r < static_cast<int>(w.rows.size()); ++r) {
    if (!w.row_alive[r]) continue;
    Row local;
    local.lo = w.rows[r].lo;
    local.hi = w.rows[r].hi;
    local.terms.reserve(w.rows[r].terms.size());
    for (const auto& [var, coef] : w.rows[r].terms) {
      local.terms.emplace_back(reduced_index[var], coef);
    }
    out.reduced.rows.push_back(std::move(local));
  }
  return out;
}

std::vector<double> postsolve(const PresolveOutcome& outcome,
                              const std::vector<double>& reduced_values) {
  std::vector<double> x = outcome.var_value;
  for (std::size_t k = 0; k < outcome.reduced.var_ids.size(); ++k) {
    x[outcome.reduced.var_ids[k]] = reduced_values[k];
  }
  for (auto it = outcome.substitutions.rbegin(); it != outcome.substitutions.rend(); ++it) {
    double v = it->constant;
    for (const auto& [var, coef] : it->terms) v += coef * x[var];
    x[it->var] = v;
  }
  return x;
}

}  // namespace flexcast::detail
