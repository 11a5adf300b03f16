#include "flexcast/lp.hpp"

#include <cmath>
#include <ostream>
#include <unordered_set>

namespace flexcast {

std::string VariableLayout::variable_name(int var) const {
  const int np = n_transactions * n_steps;
  const int ne = n_transactions * (n_steps + 1);
  if (var < np) {
    return "p" + std::to_string(var / n_steps) + "_" + std::to_string(var % n_steps);
  }
  if (var < np + ne) {
    const int rel = var - np;
    return "e" + std::to_string(rel / (n_steps + 1)) + "_" + std::to_string(rel % (n_steps + 1));
  }
  return "c";
}

int LinearProgram::add_variable(double lo, double hi, double obj) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(obj);
  return n_vars() - 1;
}

void LinearProgram::add_row(Row row) {
  rows.push_back(std::move(row));
}

void LinearProgram::add_le(std::vector<std::pair<int, double>> terms, double hi) {
  rows.push_back(Row{std::move(terms), -kInf, hi});
}

void LinearProgram::add_ge(std::vector<std::pair<int, double>> terms, double lo) {
  rows.push_back(Row{std::move(terms), lo, kInf});
}

void LinearProgram::add_eq(std::vector<std::pair<int, double>> terms, double rhs) {
  rows.push_back(Row{std::move(terms), rhs, rhs});
}

void LinearProgram::fix_variable(int var, double value) {
  lower[static_cast<std::size_t>(var)] = value;
  upper[static_cast<std::size_t>(var)] = value;
}

void LinearProgram::validate() const {
  const int n = n_vars();
  for (int j = 0; j < n; ++j) {
    const double lo = lower[j], hi = upper[j];
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      throw InternalError("variable " + std::to_string(j) + " has invalid bounds");
    }
  }
  std::unordered_set<int> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (std::isnan(row.lo) || std::isnan(row.hi) || row.lo > row.hi) {
      throw InternalError("row " + std::to_string(r) + " has invalid bounds");
    }
    seen.clear();
    for (const auto& [var, coef] : row.terms) {
      if (var < 0 || var >= n) {
        throw InternalError("row " + std::to_string(r) + " references undeclared variable " +
                            std::to_string(var));
      }
      if (!seen.insert(var).second) {
        throw InternalError("row " + std::to_string(r) + " has duplicate terms for variable " +
                            std::to_string(var));
      }
      if (std::isnan(coef)) {
        throw InternalError("row " + std::to_string(r) + " has NaN coefficient");
      }
    }
  }
}

namespace {

std::string var_name(int var, const VariableLayout* layout) {
  if (layout) return layout->variable_name(var);
  return "x" + std::to_string(var);
}

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                 const VariableLayout* layout) {
  bool first = true;
  for (const auto& [var, coef] : terms) {
    if (coef >= 0.0 && !first) out << " + ";
    if (coef < 0.0) out << (first ? "- " : " - ");
    out << std::abs(coef) << ' ' << var_name(var, layout);
    first = false;
  }
  if (first) out << "0 " << var_name(0, layout);
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::error: return "error";
  }
  return "?";
}

void LinearProgram::write_lp_format(std::ostream& out, const VariableLayout* layout) const {
  out.precision(17);
  out << (sense == Sense::minimize ? "Minimize\n" : "Maximize\n") << " obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < n_vars(); ++j) {
    if (objective[j] != 0.0) obj_terms.emplace_back(j, objective[j]);
  }
  write_terms(out, obj_terms, layout);
  out << "\nSubject To\n";
  int ri = 0;
  for (const Row& row : rows) {
    const std::string name = " r" + std::to_string(ri++);
    if (row.is_equality()) {
      out << name << ": ";
      write_terms(out, row.terms, layout);
      out << " = " << row.lo << '\n';
    } else {
      if (row.hi < kInf) {
        out << name << "u: ";
        write_terms(out, row.terms, layout);
        out << " <= " << row.hi << '\n';
      }
      if (row.lo > -kInf) {
        out << name << "l: ";
        write_terms(out, row.terms, layout);
        out << " >= " << row.lo << '\n';
      }
    }
  }
  out << "Bounds\n";
  for (int j = 0; j < n_vars(); ++j) {
    const std::string name = var_name(j, layout);
    if (lower[j] == upper[j]) {
      out << ' ' << name << " = " << lower[j] << '\n';
    } else {
      if (lower[j] == -kInf && upper[j] == kInf) {
        out << ' ' << name << " free\n";
      } else {
        out << ' ';
        if (lower[j] > -kInf) out << lower[j] << " <= ";
        out << name;
        if (upper[j] < kInf) out << " <= " << upper[j];
        out << '\n';
      }
    }
  }
  out << "End\n";
}

FeasibilityLp build_feasibility(std::span<const Transaction> transactions, const TimeGrid& grid) {
  FeasibilityLp built;
  VariableLayout& layout = built.layout;
  layout.n_transactions = static_cast<int>(transactions.size());
  layout.n_steps = grid.n_steps;
  layout.has_product = false;

  LinearProgram& lp = built.lp;
  const int total = layout.total_variables();
  lp.lower.assign(total, 0.0);
  lp.upper.assign(total, 0.0);
  lp.objective.assign(total, 0.0);

  const double dt = grid.dt_hours();
  for (int n = 0; n < layout.n_transactions; ++n) {
    const Transaction& tx = transactions[n];
    if (tx.depart_step > grid.n_steps || tx.arrive_step < 0) {
      throw HorizonError("transaction " + std::to_string(tx.id) + " spans [" +
                         std::to_string(tx.arrive_step) + ", " + std::to_string(tx.depart_step) +
                         ") outside the grid of " + std::to_string(grid.n_steps) + " steps");
    }
    for (int t = 0; t < grid.n_steps; ++t) {
      const int p = layout.power_index(n, t);
      const bool connected = t >= tx.arrive_step && t < tx.depart_step;
      lp.lower[p] = connected ? tx.p_min_kw : 0.0;
      lp.upper[p] = connected ? tx.p_max_kw : 0.0;
    }
    for (int t = 0; t <= grid.n_steps; ++t) {
      const int e = layout.energy_index(n, t);
      if (t <= tx.arrive_step) {
        lp.lower[e] = lp.upper[e] = 0.0;
      } else if (t >= tx.depart_step) {
        lp.lower[e] = lp.upper[e] = tx.energy_kwh;
      } else {
        lp.lower[e] = 0.0;
        lp.upper[e] = tx.energy_kwh;
      }
    }
    for (int t = tx.arrive_step + 1; t <= tx.depart_step; ++t) {
      lp.add_eq({{layout.energy_index(n, t), 1.0},
                 {layout.energy_index(n, t - 1), -1.0},
                 {layout.power_index(n, t - 1), -dt}},
                0.0);
    }
  }
  return built;
}

}  // namespace flexcast
