#include "simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace flexcast::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class VarState : char { basic, at_lower, at_upper, free_zero };

constexpr double kPivotTol = 1e-9;
constexpr int kRefactorInterval = 64;

struct Ray {
  int col = -1;
  double sigma = 0.0;
  VectorXd alpha;
};

class Simplex {
 public:
  Simplex(const BlockProblem& p, const std::vector<int>& active, const SolveOptions& opts)
      : p_(p), opts_(opts), active_(active) {
    n_ = static_cast<int>(p.lower.size());
    m_ = static_cast<int>(active.size());
    N_ = n_ + m_;
    cols_.assign(n_, {});
    for (int r = 0; r < m_; ++r) {
      for (const auto& [var, coef] : p.rows[active_[r]].terms) {
        cols_[var].emplace_back(r, coef);
      }
    }
    L_.resize(N_);
    U_.resize(N_);
    cost_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      L_[j] = p.lower[j];
      U_[j] = p.upper[j];
      cost_[j] = p.objective[j];
    }
    for (int r = 0; r < m_; ++r) {
      L_[n_ + r] = p.rows[active_[r]].lo;
      U_[n_ + r] = p.rows[active_[r]].hi;
    }
    state_.assign(N_, VarState::at_lower);
    x_.assign(N_, 0.0);
    basic_.resize(m_);
    for (int j = 0; j < n_; ++j) {
      if (L_[j] > -kInf) {
        state_[j] = VarState::at_lower;
        x_[j] = L_[j];
      } else if (U_[j] < kInf) {
        state_[j] = VarState::at_upper;
        x_[j] = U_[j];
      } else {
        state_[j] = VarState::free_zero;
        x_[j] = 0.0;
      }
    }
    for (int r = 0; r < m_; ++r) {
      basic_[r] = n_ + r;
      state_[n_ + r] = VarState::basic;
    }
    dtol2_ = opts.optimality_tol;
    for (int j = 0; j < n_; ++j) dtol2_ = std::max(dtol2_, opts.optimality_tol * std::abs(cost_[j]));
    iteration_limit_ = opts.iteration_limit > 0 ? opts.iteration_limit : 2000 + 30L * (m_ + n_);
    refactor();
  }

  SolveStatus run() {
    int feasibility_rounds = 0;
    while (true) {
      SolveStatus s = phase1();
      if (s != SolveStatus::optimal) return s;
      s = phase2();
      if (s == SolveStatus::error && message_ == "lost feasibility" && feasibility_rounds++ < 3) {
        message_.clear();
        continue;  // re-enter phase 1
      }
      return s;
    }
  }

  std::vector<double> structural_values() const {
    return std::vector<double>(x_.begin(), x_.begin() + n_);
  }

  // Structural direction of the unbounded ray.
  std::vector<double> structural_ray() const {
    std::vector<double> d(n_, 0.0);
    if (ray_.col < 0) return d;
    if (ray_.col < n_) d[ray_.col] = ray_.sigma;
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] < n_) d[basic_[i]] -= ray_.sigma * ray_.alpha[i];
    }
    return d;
  }

  long iterations() const { return iters_; }
  const std::string& message() const { return message_; }

 private:
  void column(int j, VectorXd& out) const {
    out.setZero(m_);
    if (j < n_) {
      for (const auto& [r, coef] : cols_[j]) out[r] = coef;
    } else {
      out[j - n_] = -1.0;
    }
  }

  void refactor() {
    MatrixXd B = MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (j < n_) {
        for (const auto& [r, coef] : cols_[j]) B(r, i) = coef;
      } else {
        B(j - n_, i) = -1.0;
      }
    }
    lu_.compute(B);
    etas_.clear();
    recompute_basics();
  }

  void recompute_basics() {
    VectorXd rhs = VectorXd::Zero(m_);
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      if (j < n_) {
        for (const auto& [r, coef] : cols_[j]) rhs[r] -= coef * x_[j];
      } else {
        rhs[j - n_] += x_[j];
      }
    }
    VectorXd xb = ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[basic_[i]] = xb[i];
  }

  VectorXd ftran(const VectorXd& v) const {
    VectorXd w = lu_.solve(v);
    for (const auto& e : etas_) {
      const double t = w[e.r] / e.alpha[e.r];
      w -= e.alpha * t;
      w[e.r] = t;
    }
    return w;
  }

  VectorXd btran(VectorXd z) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const double s = it->alpha.dot(z);
      z[it->r] -= (s - z[it->r]) / it->alpha[it->r];
    }
    // B = P^-1 L U  =>  B^T y = z  via  U^T w = z, L^T v = w, y = P^T v
    VectorXd w = lu_.matrixLU().triangularView<Eigen::Upper>().transpose().solve(z);
    VectorXd v = lu_.matrixLU().triangularView<Eigen::UnitLower>().transpose().solve(w);
    return lu_.permutationP().transpose() * v;
  }

  double infeasibility(int j) const {
    if (x_[j] < L_[j]) return L_[j] - x_[j];
    if (x_[j] > U_[j]) return x_[j] - U_[j];
    return 0.0;
  }

  double max_basic_infeasibility() const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) worst = std::max(worst, infeasibility(basic_[i]));
    return worst;
  }

  double reduced_cost(int j, const VectorXd& y, bool phase_one) const {
    double d = phase_one ? 0.0 : cost_[j];
    if (j < n_) {
      for (const auto& [r, coef] : cols_[j]) d -= y[r] * coef;
    } else {
      d += y[j - n_];
    }
    return d;
  }

  // Entering column under the current pricing vector. Returns -1 if none.
  int price(const VectorXd& y, bool phase_one, double dtol, double& dir, double& dj) const {
    int best = -1;
    double best_score = dtol;
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == VarState::basic) continue;
      if (L_[j] == U_[j]) continue;  // fixed column can never improve
      const double d = reduced_cost(j, y, phase_one);
      double score = 0.0, sigma = 0.0;
      switch (state_[j]) {
        case VarState::at_lower:
          if (d < -dtol) {
            score = -d;
            sigma = 1.0;
          }
          break;
        case VarState::at_upper:
          if (d > dtol) {
            score = d;
            sigma = -1.0;
          }
          break;
        case VarState::free_zero:
          if (std::abs(d) > dtol) {
            score = std::abs(d);
            sigma = d < 0.0 ? 1.0 : -1.0;
          }
          break;
        case VarState::basic:
          break;
      }
      if (score > 0.0) {
        if (bland_) {
          dir = sigma;
          dj = d;
          return j;
        }
        if (score > best_score) {
          best_score = score;
          best = j;
          dir = sigma;
          dj = d;
        }
      }
    }
    return best;
  }

  struct Leaving {
    double t = kInf;
    int pos = -1;          // basis position; -1 = entering hits its own bound
    bool to_upper = false; // bound the leaving variable lands on
  };

  // Standard bounded ratio test (phase 2).
  bool ratio_phase2(int j, double sigma, const VectorXd& alpha, Leaving& out) const {
    double best_t = (L_[j] > -kInf && U_[j] < kInf) ? U_[j] - L_[j] : kInf;
    int best_pos = -1;
    bool best_upper = sigma > 0.0;
    double best_abs = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= kPivotTol) continue;
      const int b = basic_[i];
      const double delta = -sigma * a;  // movement of x_[b] per unit step
      double cap;
      bool upper;
      if (delta > 0.0) {
        if (U_[b] == kInf) continue;
        cap = (U_[b] - x_[b]) / delta;
        upper = true;
      } else {
        if (L_[b] == -kInf) continue;
        cap = (L_[b] - x_[b]) / delta;
        upper = false;
      }
      if (cap < 0.0) cap = 0.0;
      if (cap < best_t - 1e-10) {
        best_t = cap;
        best_pos = i;
        best_upper = upper;
        best_abs = std::abs(a);
      } else if (cap <= best_t + 1e-10 && std::abs(a) > best_abs) {
        best_t = std::min(best_t, cap);
        best_pos = i;
        best_upper = upper;
        best_abs = std::abs(a);
      }
    }
    if (best_t == kInf) return false;
    out.t = best_t;
    out.pos = best_pos;
    out.to_upper = best_pos < 0 ? (sigma > 0.0) : best_upper;
    return true;
  }

  // Long-step phase-1 ratio test over the piecewise-linear infeasibility sum.
  // Every bound crossing of a basic variable increases the slope by |delta|;
  // we stop at the first event where the accumulated slope turns nonnegative.
  bool ratio_phase1(int j, double sigma, double slope0, const VectorXd& alpha,
                    Leaving& out) const {
    struct Event {
      double t;
      double gain;
      int pos;
      bool to_upper;
    };
    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(m_) * 2 + 1);
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= kPivotTol) continue;
      const int b = basic_[i];
      const double delta = -sigma * a;
      // crossing conditions complement the strict infeasibility test in the
      // pricing gradient, so a basic sitting exactly on a bound contributes a
      // t = 0 event when pushed outward
      if (delta > 0.0) {
        if (x_[b] < L_[b]) events.push_back({(L_[b] - x_[b]) / delta, delta, i, false});
        if (U_[b] < kInf && x_[b] <= U_[b]) {
          events.push_back({std::max(0.0, (U_[b] - x_[b]) / delta), delta, i, true});
        }
      } else {
        if (x_[b] > U_[b]) events.push_back({(U_[b] - x_[b]) / delta, -delta, i, true});
        if (L_[b] > -kInf && x_[b] >= L_[b]) {
          events.push_back({std::max(0.0, (L_[b] - x_[b]) / delta), -delta, i, false});
        }
      }
    }
    if (L_[j] > -kInf && U_[j] < kInf) {
      events.push_back({U_[j] - L_[j], kInf, -1, sigma > 0.0});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      if (a.t != b.t) return a.t < b.t;
      if (a.gain != b.gain) return a.gain > b.gain;
      return a.pos < b.pos;
    });
    double slope = slope0;
    for (const Event& e : events) {
      slope += e.gain;
      if (slope >= 0.0) {
        out.t = std::max(e.t, 0.0);
        out.pos = e.pos;
        out.to_upper = e.to_upper;
        return true;
      }
    }
    return false;
  }

  void apply_step(int j, double sigma, const VectorXd& alpha, const Leaving& leave) {
    const double t = leave.t;
    if (t != 0.0) {
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[basic_[i]] -= sigma * alpha[i] * t;
      }
      x_[j] += sigma * t;
    }
    if (leave.pos < 0) {
      state_[j] = leave.to_upper ? VarState::at_upper : VarState::at_lower;
      x_[j] = leave.to_upper ? U_[j] : L_[j];
      return;
    }
    const int lv = basic_[leave.pos];
    x_[lv] = leave.to_upper ? U_[lv] : L_[lv];
    state_[lv] = leave.to_upper ? VarState::at_upper : VarState::at_lower;
    basic_[leave.pos] = j;
    state_[j] = VarState::basic;
    etas_.push_back({leave.pos, alpha});
    if (static_cast<int>(etas_.size()) >= kRefactorInterval) refactor();
  }

  double total_infeasibility() const {
    double total = 0.0;
    for (int i = 0; i < m_; ++i) total += infeasibility(basic_[i]);
    return total;
  }

  SolveStatus phase1() {
    int clean_checks = 0;
    reset_progress();
    while (true) {
      if (++iters_ > iteration_limit_) {
        message_ = "iteration limit exceeded in phase 1";
        return SolveStatus::error;
      }
      if (max_basic_infeasibility() <= opts_.feasibility_tol) return SolveStatus::optimal;

      VectorXd g = VectorXd::Zero(m_);
      for (int i = 0; i < m_; ++i) {
        const int b = basic_[i];
        if (x_[b] > U_[b]) {
          g[i] = 1.0;
        } else if (x_[b] < L_[b]) {
          g[i] = -1.0;
        }
      }
      VectorXd y = btran(g);
      double sigma = 0.0, dj = 0.0;
      const int j = price(y, true, opts_.optimality_tol, sigma, dj);
      if (j < 0) {
        if (!etas_.empty() && clean_checks < 2) {
          ++clean_checks;
          refactor();
          continue;
        }
        message_ = "phase 1 stalled at infeasibility " +
                   std::to_string(max_basic_infeasibility());
        return SolveStatus::infeasible;
      }
      VectorXd acol(m_);
      column(j, acol);
      const VectorXd alpha = ftran(acol);
      Leaving leave;
      if (!ratio_phase1(j, sigma, sigma * dj, alpha, leave)) {
        message_ = "phase 1 found no blocking event";
        return SolveStatus::error;
      }
      apply_step(j, sigma, alpha, leave);
      track_progress(total_infeasibility());
    }
  }

  SolveStatus phase2() {
    int clean_checks = 0;
    reset_progress();
    while (true) {
      if (++iters_ > iteration_limit_) {
        message_ = "iteration limit exceeded in phase 2";
        return SolveStatus::error;
      }
      if (max_basic_infeasibility() > 1e3 * opts_.feasibility_tol) {
        message_ = "lost feasibility";
        return SolveStatus::error;
      }
      VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
      VectorXd y = btran(cb);
      double sigma = 0.0, dj = 0.0;
      const int j = price(y, false, dtol2_, sigma, dj);
      if (j < 0) {
        if (!etas_.empty() && clean_checks < 3) {
          ++clean_checks;
          refactor();
          continue;
        }
        return SolveStatus::optimal;
      }
      VectorXd acol(m_);
      column(j, acol);
      const VectorXd alpha = ftran(acol);
      Leaving leave;
      if (!ratio_phase2(j, sigma, alpha, leave)) {
        ray_.col = j;
        ray_.sigma = sigma;
        ray_.alpha = alpha;
        message_ = "unbounded direction on column " + std::to_string(j);
        return SolveStatus::unbounded;
      }
      apply_step(j, sigma, alpha, leave);
      double obj = 0.0;
      for (int v = 0; v < N_; ++v) obj += cost_[v] * x_[v];
      track_progress(obj);
    }
  }

  void reset_progress() {
    stall_ = 0;
    bland_ = false;
    last_obj_ = std::numeric_limits<double>::infinity();
  }

  void track_progress(double metric) {
    if (metric < last_obj_ - 1e-12 * (1.0 + std::abs(last_obj_))) {
      stall_ = 0;
      bland_ = false;
    } else {
      if (++stall_ > 2000) bland_ = true;
    }
    last_obj_ = metric;
  }

  const BlockProblem& p_;
  const SolveOptions& opts_;
  std::vector<int> active_;
  int n_ = 0, m_ = 0, N_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> L_, U_, cost_;
  std::vector<VarState> state_;
  std::vector<double> x_;
  std::vector<int> basic_;
  Eigen::PartialPivLU<MatrixXd> lu_;
  struct Eta {
    int r;
    VectorXd alpha;
  };
  std::vector<Eta> etas_;
  Ray ray_;
  long iters_ = 0;
  long iteration_limit_ = 0;
  bool bland_ = false;
  long stall_ = 0;
  double last_obj_ = std::numeric_limits<double>::infinity();
  double dtol2_ = 1e-9;
  std::string message_;
};

double row_activity(const Row& row, const std::vector<double>& x) {
  double act = 0.0;
  for (const auto& [var, coef] : row.terms) act += coef * x[var];
  return act;
}

}  // namespace

BlockResult solve_block(const BlockProblem& problem, const SolveOptions& options) {
  const int n_rows = static_cast<int>(problem.rows.size());
  std::vector<int> active;
  std::vector<int> pool;
  const bool use_lazy = !problem.lazy.empty() && n_rows > options.lazy_row_threshold;
  for (int r = 0; r < n_rows; ++r) {
    if (use_lazy && problem.lazy[r]) {
      pool.push_back(r);
    } else {
      active.push_back(r);
    }
  }

  BlockResult result;
  for (int round = 0; round < 400; ++round) {
    Simplex simplex(problem, active, options);
    const SolveStatus status = simplex.run();
    result.iterations += simplex.iterations();
    result.message = simplex.message();

    if (status == SolveStatus::optimal) {
      const std::vector<double> x = simplex.structural_values();
      std::vector<int> violated;
      for (int r : pool) {
        const Row& row = problem.rows[r];
        const double act = row_activity(row, x);
        const double scale = std::max({1.0, std::abs(row.lo), std::abs(row.hi)});
        if ((row.lo > -kInf && act < row.lo - options.feasibility_tol * scale) ||
            (row.hi < kInf && act > row.hi + options.feasibility_tol * scale)) {
          violated.push_back(r);
        }
      }
      if (violated.empty()) {
        result.status = SolveStatus::optimal;
        result.x = x;
        return result;
      }
      for (int r : violated) {
        active.push_back(r);
        pool.erase(std::remove(pool.begin(), pool.end(), r), pool.end());
      }
      continue;
    }
    if (status == SolveStatus::unbounded) {
      const std::vector<double> ray = simplex.structural_ray();
      std::vector<int> cutting;
      for (int r : pool) {
        const Row& row = problem.rows[r];
        const double along = row_activity(row, ray);
        if ((row.hi < kInf && along > 1e-9) || (row.lo > -kInf && along < -1e-9)) {
          cutting.push_back(r);
        }
      }
      if (cutting.empty()) {
        result.status = SolveStatus::unbounded;
        result.x = simplex.structural_values();
        return result;
      }
      for (int r : cutting) {
        active.push_back(r);
        pool.erase(std::remove(pool.begin(), pool.end(), r), pool.end());
      }
      continue;
    }
    result.status = status;
    result.x = simplex.structural_values();
    return result;
  }
  result.status = SolveStatus::error;
  result.message = "lazy row activation did not converge";
  return result;
}

}  // namespace flexcast::detail
