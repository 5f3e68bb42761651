// SPDX-License-Identifier: Apache-2.0
#include "hubq/lp.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace hubq::lp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int Problem::add_variable(double cost, double lo, double hi) {
  assert(lo <= hi && lo > -kInf);
  cols_.emplace_back();
  cost_.push_back(cost);
  lo_.push_back(lo);
  hi_.push_back(hi);
  return static_cast<int>(cost_.size()) - 1;
}

int Problem::add_row(RowSense sense, double rhs) {
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void Problem::add_term(int row, int col, double coef) {
  assert(row >= 0 && row < num_rows() && col >= 0 && col < num_vars());
  if (coef != 0.0) cols_[col].emplace_back(row, coef);
}

void Problem::set_bounds(int col, double lo, double hi) {
  assert(lo <= hi && lo > -kInf);
  lo_[col] = lo;
  hi_[col] = hi;
}

namespace {

enum VarState : uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

// Simplex working set: structural columns, then one slack per row, then
// artificials appended for rows whose slack cannot absorb the initial
// residual.  The basis inverse is dense, column-major (column r of binv is
// the r-th column of B^{-1} and lives contiguously at binv[r*m .. r*m+m)).
class Simplex {
 public:
  Simplex(const Problem& p, const Options& opts) : p_(p), opts_(opts) { build(); }

  Solution run() {
    Solution sol;
    // Phase 1: drive artificial variables to zero under unit costs.
    if (n_artificial_ > 0) {
      phase1_ = true;
      const Status st = iterate();
      if (st != Status::Optimal) {
        sol.status = st == Status::Unbounded ? Status::Infeasible : st;
        sol.iterations = iterations_;
        return sol;
      }
      double art_sum = 0.0;
      for (int i = 0; i < m_; ++i)
        if (basic_[i] >= art_start_) art_sum += std::abs(xb_[i]);
      if (art_sum > opts_.feas_tol * (1.0 + rhs_scale_)) {
        sol.status = Status::Infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      // Pin every artificial at zero for phase 2.
      for (int j = art_start_; j < n_total_; ++j) {
        lo_[j] = hi_[j] = 0.0;
      }
      for (int i = 0; i < m_; ++i)
        if (basic_[i] >= art_start_ && std::abs(xb_[i]) <= opts_.feas_tol) xb_[i] = 0.0;
    }
    phase1_ = false;
    stall_ = 0;
    bland_ = false;
    const Status st = iterate();
    sol.status = st;
    sol.iterations = iterations_;
    if (st != Status::Optimal) return sol;

    polish();
    sol.x.resize(p_.num_vars());
    for (int j = 0; j < p_.num_vars(); ++j) sol.x[j] = value_of(j);
    sol.objective = 0.0;
    for (int j = 0; j < p_.num_vars(); ++j) sol.objective += p_.cost(j) * sol.x[j];
    return sol;
  }

 private:
  void build() {
    m_ = p_.num_rows();
    n_struct_ = p_.num_vars();
    const int n_slack = m_;
    art_start_ = n_struct_ + n_slack;

    // Gather columns (structural then slack) into flat CSC storage.
    col_ptr_.assign(art_start_ + 1, 0);
    size_t nnz = 0;
    for (int j = 0; j < n_struct_; ++j) nnz += p_.column(j).size();
    nnz += n_slack;
    row_idx_.reserve(nnz);
    val_.reserve(nnz);
    cost_.assign(art_start_, 0.0);
    lo_.assign(art_start_, 0.0);
    hi_.assign(art_start_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      col_ptr_[j] = static_cast<int>(row_idx_.size());
      for (const auto& [r, v] : p_.column(j)) {
        row_idx_.push_back(r);
        val_.push_back(v);
      }
      cost_[j] = p_.cost(j);
      lo_[j] = p_.lower(j);
      hi_[j] = p_.upper(j);
    }
    for (int i = 0; i < m_; ++i) {
      const int j = n_struct_ + i;
      col_ptr_[j] = static_cast<int>(row_idx_.size());
      row_idx_.push_back(i);
      val_.push_back(1.0);
      lo_[j] = 0.0;
      hi_[j] = p_.sense(i) == RowSense::Equal ? 0.0 : kInf;
    }
    col_ptr_[art_start_] = static_cast<int>(row_idx_.size());

    rhs_scale_ = 0.0;
    for (int i = 0; i < m_; ++i) rhs_scale_ = std::max(rhs_scale_, std::abs(p_.rhs(i)));
    cost_scale_ = 0.0;
    for (int j = 0; j < n_struct_; ++j) cost_scale_ = std::max(cost_scale_, std::abs(cost_[j]));

    // Start with every structural variable at its lower bound and compute
    // the residual each row's slack would have to carry.
    state_.assign(art_start_, kAtLower);
    std::vector<double> resid(m_);
    for (int i = 0; i < m_; ++i) resid[i] = p_.rhs(i);
    for (int j = 0; j < n_struct_; ++j) {
      const double x = lo_[j];
      if (x != 0.0)
        for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) resid[row_idx_[e]] -= val_[e] * x;
    }

    basic_.assign(m_, -1);
    xb_.assign(m_, 0.0);
    std::vector<int> art_rows;
    for (int i = 0; i < m_; ++i) {
      const int sj = n_struct_ + i;
      const bool slack_fits =
          resid[i] >= lo_[sj] - opts_.feas_tol && resid[i] <= hi_[sj] + opts_.feas_tol;
      if (slack_fits) {
        basic_[i] = sj;
        xb_[i] = resid[i];
      } else {
        art_rows.push_back(i);
      }
    }
    n_artificial_ = static_cast<int>(art_rows.size());
    n_total_ = art_start_ + n_artificial_;
    cost_.resize(n_total_, 0.0);
    lo_.resize(n_total_, 0.0);
    hi_.resize(n_total_, kInf);
    state_.resize(n_total_, kAtLower);
    for (int a = 0; a < n_artificial_; ++a) {
      const int i = art_rows[a];
      const int j = art_start_ + a;
      col_ptr_.push_back(static_cast<int>(row_idx_.size()) + 1);
      row_idx_.push_back(i);
      val_.push_back(resid[i] >= 0.0 ? 1.0 : -1.0);
      basic_[i] = j;
      xb_[i] = std::abs(resid[i]);
      // The displaced slack stays nonbasic at its nearest feasible bound.
    }

    basic_pos_.assign(n_total_, -1);
    for (int i = 0; i < m_; ++i) {
      basic_pos_[basic_[i]] = i;
      state_[basic_[i]] = kBasic;
    }

    // Initial basis is slacks/artificials only, so B = I up to signs.
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      const double d = val_[col_ptr_[j]];  // +-1 on the diagonal
      binv_[static_cast<size_t>(i) * m_ + i] = 1.0 / d;
    }
    recompute_basics();
  }

  double value_of(int j) const {
    if (state_[j] == kBasic) return xb_[basic_pos_[j]];
    return state_[j] == kAtLower ? lo_[j] : hi_[j];
  }

  double phase_cost(int j) const {
    if (phase1_) return j >= art_start_ ? 1.0 : 0.0;
    return j < n_struct_ ? cost_[j] : 0.0;
  }

  // y = (B^{-1})' c_B
  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    std::vector<double> cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = phase_cost(basic_[i]);
    for (int k = 0; k < m_; ++k) {
      const double* col = &binv_[static_cast<size_t>(k) * m_];
      double acc = 0.0;
      for (int i = 0; i < m_; ++i) acc += col[i] * cb[i];
      y[k] = acc;
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = phase_cost(j);
    for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) d -= y[row_idx_[e]] * val_[e];
    return d;
  }

  // w = B^{-1} a_j
  void ftran(int j, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) {
      const double v = val_[e];
      const double* col = &binv_[static_cast<size_t>(row_idx_[e]) * m_];
      for (int i = 0; i < m_; ++i) w[i] += v * col[i];
    }
  }

  Status iterate() {
    std::vector<double> y, w(m_);
    const double dtol = opts_.dual_tol * (1.0 + (phase1_ ? 1.0 : cost_scale_));
    int since_refactor = 0;
    while (true) {
      if (iterations_ >= opts_.max_iterations) return Status::IterationLimit;
      compute_duals(y);

      // Entering column.
      int q = -1;
      double best = dtol;
      for (int j = 0; j < n_total_; ++j) {
        if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
        const double d = reduced_cost(j, y);
        const double viol = state_[j] == kAtLower ? -d : d;
        if (viol > best) {
          best = viol;
          q = j;
          if (bland_) break;  // first eligible index
        }
      }
      if (q < 0) return Status::Optimal;

      ftran(q, w);
      const int dir = state_[q] == kAtLower ? 1 : -1;

      // Ratio test: x_q moves by dir*t, basics move by -dir*t*w.
      double t_limit = hi_[q] - lo_[q];  // bound flip
      int leave = -1;                    // basis position, -1 = flip
      for (int i = 0; i < m_; ++i) {
        const double g = dir * w[i];
        if (g > opts_.pivot_tol) {
          const double t = (xb_[i] - lo_[basic_[i]]) / g;
          if (t < t_limit - 1e-12 ||
              (t < t_limit + 1e-12 && better_leave(i, leave, w))) {
            t_limit = std::min(t_limit, std::max(t, 0.0));
            leave = i;
          }
        } else if (g < -opts_.pivot_tol && hi_[basic_[i]] < kInf) {
          const double t = (hi_[basic_[i]] - xb_[i]) / (-g);
          if (t < t_limit - 1e-12 ||
              (t < t_limit + 1e-12 && better_leave(i, leave, w))) {
            t_limit = std::min(t_limit, std::max(t, 0.0));
            leave = i;
          }
        }
      }
      if (t_limit == kInf) return Status::Unbounded;

      ++iterations_;
      if (t_limit <= 1e-12) {
        if (++stall_ > 2000) bland_ = true;
      } else {
        stall_ = 0;
      }

      if (leave < 0) {
        // Bound flip, no basis change.
        for (int i = 0; i < m_; ++i) xb_[i] -= dir * t_limit * w[i];
        state_[q] = state_[q] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }

      const int leaving = basic_[leave];
      const double g_leave = dir * w[leave];
      for (int i = 0; i < m_; ++i) xb_[i] -= dir * t_limit * w[i];
      xb_[leave] = state_[q] == kAtLower ? lo_[q] + t_limit : hi_[q] - t_limit;
      state_[leaving] = g_leave > 0.0 ? kAtLower : kAtUpper;
      // Artificials never come back once they leave the basis.
      if (leaving >= art_start_) {
        lo_[leaving] = hi_[leaving] = 0.0;
        state_[leaving] = kAtLower;
      }
      state_[q] = kBasic;
      basic_pos_[leaving] = -1;
      basic_[leave] = q;
      basic_pos_[q] = leave;
      update_binv(leave, w);

      if (++since_refactor >= opts_.refactor_every) {
        refactor();
        recompute_basics();
        since_refactor = 0;
      }
    }
  }

  bool better_leave(int cand, int incumbent, const std::vector<double>& w) const {
    if (incumbent < 0) return true;
    const double a = std::abs(w[cand]), b = std::abs(w[incumbent]);
    if (a != b) return a > b;
    return basic_[cand] < basic_[incumbent];
  }

  // B^{-1} <- E * B^{-1} with eta column derived from w at pivot position rp.
  void update_binv(int rp, const std::vector<double>& w) {
    const double piv = w[rp];
    for (int k = 0; k < m_; ++k) {
      double* col = &binv_[static_cast<size_t>(k) * m_];
      const double mrp = col[rp];
      if (mrp == 0.0) continue;
      const double f = mrp / piv;
      for (int i = 0; i < m_; ++i) col[i] -= f * w[i];
      col[rp] = f;  // overwritten by the loop above, restore E effect
    }
  }

  // Dense Gauss-Jordan rebuild of B^{-1} from the current basis columns.
  void refactor() {
    std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);  // column-major
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e)
        B[static_cast<size_t>(i) * m_ + row_idx_[e]] = val_[e];
    }
    std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<size_t>(i) * m_ + i] = 1.0;
    std::vector<int> perm(m_);
    for (int col = 0; col < m_; ++col) {
      // Partial pivoting over rows.
      int piv_row = -1;
      double piv_abs = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double a = std::abs(B[static_cast<size_t>(col) * m_ + r]);
        if (a > piv_abs) {
          bool used = false;
          for (int c = 0; c < col; ++c)
            if (perm[c] == r) used = true;
          if (!used) {
            piv_abs = a;
            piv_row = r;
          }
        }
      }
      if (piv_row < 0 || piv_abs < 1e-12) throw std::runtime_error("lp: singular basis");
      perm[col] = piv_row;
      const double piv = B[static_cast<size_t>(col) * m_ + piv_row];
      for (int c = 0; c < m_; ++c) {
        B[static_cast<size_t>(c) * m_ + piv_row] /= piv;
        inv[static_cast<size_t>(c) * m_ + piv_row] /= piv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == piv_row) continue;
        const double f = B[static_cast<size_t>(col) * m_ + r];
        if (f == 0.0) continue;
        for (int c = 0; c < m_; ++c) {
          B[static_cast<size_t>(c) * m_ + r] -= f * B[static_cast<size_t>(c) * m_ + piv_row];
          inv[static_cast<size_t>(c) * m_ + r] -= f * inv[static_cast<size_t>(c) * m_ + piv_row];
        }
      }
    }
    // Undo the row permutation: solution of B z = e_k sits in permuted rows.
    // After Gauss-Jordan, row perm[col] of `inv` holds row `col` of B^{-1}.
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int col = 0; col < m_; ++col)
      for (int k = 0; k < m_; ++k)
        binv_[static_cast<size_t>(k) * m_ + col] = inv[static_cast<size_t>(k) * m_ + perm[col]];
  }

  // xb = B^{-1} (b - A_N x_N)
  void recompute_basics() {
    std::vector<double> r(m_);
    for (int i = 0; i < m_; ++i) r[i] = p_.rhs(i);
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] == kBasic) continue;
      const double x = state_[j] == kAtLower ? lo_[j] : hi_[j];
      if (x == 0.0) continue;
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) r[row_idx_[e]] -= val_[e] * x;
    }
    std::fill(xb_.begin(), xb_.end(), 0.0);
    for (int k = 0; k < m_; ++k) {
      const double rk = r[k];
      if (rk == 0.0) continue;
      const double* col = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) xb_[i] += rk * col[i];
    }
  }

  // Final cleanup: refresh basic values and clamp roundoff-level bound
  // violations so extracted solutions are exactly within bounds.
  void polish() {
    refactor();
    recompute_basics();
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (xb_[i] < lo_[j] && xb_[i] > lo_[j] - 1e-7) xb_[i] = lo_[j];
      if (xb_[i] > hi_[j] && xb_[i] < hi_[j] + 1e-7) xb_[i] = hi_[j];
    }
  }

  const Problem& p_;
  const Options& opts_;

  int m_ = 0, n_struct_ = 0, n_total_ = 0, art_start_ = 0, n_artificial_ = 0;
  std::vector<int> col_ptr_, row_idx_;
  std::vector<double> val_;
  std::vector<double> cost_, lo_, hi_;
  std::vector<uint8_t> state_;
  std::vector<int> basic_, basic_pos_;
  std::vector<double> binv_, xb_;
  double rhs_scale_ = 0.0, cost_scale_ = 0.0;
  bool phase1_ = false, bland_ = false;
  int stall_ = 0;
  int iterations_ = 0;
};

}  // namespace

Solution solve(const Problem& p, const Options& opts) {
  Simplex s(p, opts);
  return s.run();
}

// ---------------------------------------------------------------------------
// Incremental dual simplex.
//
// Variable layout: structural columns 0..n_struct-1 (sparse, fixed at
// construction), then one slack per row appended in row order.  Rows may
// be added between solves; the basis is extended with the new slack basic
// and the inverse grown by the block formula
//   [[B, 0], [R, I]]^{-1} = [[B^{-1}, 0], [-R B^{-1}, I]].
// Bound changes keep the basis; a flip pass restores the sign convention
// on nonbasic reduced costs before dual pivoting resumes.
// ---------------------------------------------------------------------------

struct IncrementalSolver::Impl {
  Options opts;
  int n_struct = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;  // structural only
  std::vector<double> cost, lo, hi;                       // structural only
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  // Basis over n_struct + m variables; slack of row i is n_struct + i.
  std::vector<uint8_t> state;
  std::vector<int> basic, basic_pos;
  std::vector<double> binv;  // column-major, m*m
  std::vector<double> xb;
  int m = 0;            // rows woven into the basis
  bool has_basis = false;
  int iterations = 0;
  std::vector<int> pending_basis;  // hint consumed by the next run()
  // Inverse updates since the last factorization.  Warm restarts are often
  // short, so drift has to be tracked across solves, not per call.
  int updates_since_refactor = 0;

  int rows_total() const { return static_cast<int>(rhs.size()); }
  int vars_total() const { return n_struct + m; }

  double var_lo(int j) const { return j < n_struct ? lo[j] : 0.0; }
  double var_hi(int j) const {
    if (j < n_struct) return hi[j];
    return sense[j - n_struct] == RowSense::Equal ? 0.0 : kInf;
  }
  double var_cost(int j) const { return j < n_struct ? cost[j] : 0.0; }

  template <typename F>
  void for_entries(int j, F&& f) const {
    if (j < n_struct) {
      for (const auto& [r, v] : cols[j]) f(r, v);
    } else {
      f(j - n_struct, 1.0);
    }
  }

  double nonbasic_value(int j) const {
    return state[j] == kAtLower ? var_lo(j) : var_hi(j);
  }

  void ftran(int j, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    for_entries(j, [&](int r, double v) {
      const double* col = &binv[static_cast<size_t>(r) * m];
      for (int i = 0; i < m; ++i) w[i] += v * col[i];
    });
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m, 0.0);
    std::vector<double> cb(m);
    for (int i = 0; i < m; ++i) cb[i] = var_cost(basic[i]);
    for (int k = 0; k < m; ++k) {
      const double* col = &binv[static_cast<size_t>(k) * m];
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += col[i] * cb[i];
      y[k] = acc;
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = var_cost(j);
    for_entries(j, [&](int r, double v) { d -= y[r] * v; });
    return d;
  }

  void update_binv(int rp, const std::vector<double>& w) {
    const double piv = w[rp];
    for (int k = 0; k < m; ++k) {
      double* col = &binv[static_cast<size_t>(k) * m];
      const double mrp = col[rp];
      if (mrp == 0.0) continue;
      const double f = mrp / piv;
      for (int i = 0; i < m; ++i) col[i] -= f * w[i];
      col[rp] = f;
    }
    ++updates_since_refactor;
  }

  void recompute_basics() {
    std::vector<double> r(m);
    for (int i = 0; i < m; ++i) r[i] = rhs[i];
    for (int j = 0; j < vars_total(); ++j) {
      if (state[j] == kBasic) continue;
      const double x = nonbasic_value(j);
      if (x == 0.0) continue;
      for_entries(j, [&](int row, double v) { r[row] -= v * x; });
    }
    std::fill(xb.begin(), xb.end(), 0.0);
    for (int k = 0; k < m; ++k) {
      const double rk = r[k];
      if (rk == 0.0) continue;
      const double* col = &binv[static_cast<size_t>(k) * m];
      for (int i = 0; i < m; ++i) xb[i] += rk * col[i];
    }
  }

  void refactor() {
    std::vector<double> B(static_cast<size_t>(m) * m, 0.0);  // column-major
    for (int i = 0; i < m; ++i)
      for_entries(basic[i],
                  [&](int r, double v) { B[static_cast<size_t>(i) * m + r] = v; });
    std::vector<double> inv(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) inv[static_cast<size_t>(i) * m + i] = 1.0;
    std::vector<int> perm(m);
    std::vector<char> used(m, 0);
    for (int col = 0; col < m; ++col) {
      int piv_row = -1;
      double piv_abs = 0.0;
      for (int r = 0; r < m; ++r) {
        if (used[r]) continue;
        const double a = std::abs(B[static_cast<size_t>(col) * m + r]);
        if (a > piv_abs) {
          piv_abs = a;
          piv_row = r;
        }
      }
      if (piv_row < 0 || piv_abs < 1e-12)
        throw std::runtime_error("lp: singular basis in incremental refactor");
      perm[col] = piv_row;
      used[piv_row] = 1;
      const double piv = B[static_cast<size_t>(col) * m + piv_row];
      for (int c = 0; c < m; ++c) {
        B[static_cast<size_t>(c) * m + piv_row] /= piv;
        inv[static_cast<size_t>(c) * m + piv_row] /= piv;
      }
      for (int r = 0; r < m; ++r) {
        if (r == piv_row) continue;
        const double f = B[static_cast<size_t>(col) * m + r];
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) {
          B[static_cast<size_t>(c) * m + r] -= f * B[static_cast<size_t>(c) * m + piv_row];
          inv[static_cast<size_t>(c) * m + r] -= f * inv[static_cast<size_t>(c) * m + piv_row];
        }
      }
    }
    binv.assign(static_cast<size_t>(m) * m, 0.0);
    for (int col = 0; col < m; ++col)
      for (int k = 0; k < m; ++k)
        binv[static_cast<size_t>(k) * m + col] =
            inv[static_cast<size_t>(k) * m + perm[col]];
    updates_since_refactor = 0;
  }

  // Installs the all-slack basis with every structural at the bound that
  // matches its cost sign.
  void cold_basis() {
    m = rows_total();
    state.assign(vars_total(), kAtLower);
    for (int j = 0; j < n_struct; ++j)
      if (cost[j] < 0.0) state[j] = kAtUpper;
    basic.assign(m, 0);
    basic_pos.assign(vars_total(), -1);
    for (int i = 0; i < m; ++i) {
      const int sj = n_struct + i;
      basic[i] = sj;
      basic_pos[sj] = i;
      state[sj] = kBasic;
    }
    binv.assign(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) binv[static_cast<size_t>(i) * m + i] = 1.0;
    xb.assign(m, 0.0);
    has_basis = true;
    updates_since_refactor = 0;
    recompute_basics();
  }

  // Builds binv by permuted triangular substitution.  Returns false when
  // the basis has no such ordering; callers then pay for the dense
  // factorization.  Covers the common hint shape: one route column per
  // assignment row plus slacks, which is lower triangular after reordering.
  bool triangular_binv() {
    std::vector<std::vector<std::pair<int, double>>> rows(m);
    for (int i = 0; i < m; ++i)
      for_entries(basic[i], [&](int r, double v) {
        if (v != 0.0) rows[r].emplace_back(i, v);
      });
    std::vector<std::vector<int>> col_rows(m);
    std::vector<int> remaining(m, 0);
    for (int r = 0; r < m; ++r) {
      remaining[r] = static_cast<int>(rows[r].size());
      for (const auto& [i, v] : rows[r]) col_rows[i].push_back(r);
    }
    std::vector<char> col_done(m, 0), row_done(m, 0);
    std::vector<int> stack;
    for (int r = 0; r < m; ++r)
      if (remaining[r] == 1) stack.push_back(r);
    std::vector<int> order_row, order_pos;
    std::vector<double> order_piv;
    order_row.reserve(m);
    order_pos.reserve(m);
    order_piv.reserve(m);
    while (!stack.empty()) {
      const int r = stack.back();
      stack.pop_back();
      if (row_done[r] || remaining[r] != 1) continue;
      int pos = -1;
      double piv = 0.0;
      for (const auto& [i, v] : rows[r])
        if (!col_done[i]) {
          pos = i;
          piv = v;
        }
      if (pos < 0 || std::abs(piv) < 1e-12) return false;
      row_done[r] = 1;
      col_done[pos] = 1;
      order_row.push_back(r);
      order_pos.push_back(pos);
      order_piv.push_back(piv);
      for (int r2 : col_rows[pos]) {
        if (row_done[r2]) continue;
        if (--remaining[r2] == 1) stack.push_back(r2);
      }
    }
    if (static_cast<int>(order_row.size()) != m) return false;

    // Forward substitution per unit vector; rows touch only columns that
    // were eliminated no later, so a single pass fills each inverse column.
    binv.assign(static_cast<size_t>(m) * m, 0.0);
    std::vector<double> x(m);
    for (int e = 0; e < m; ++e) {
      std::fill(x.begin(), x.end(), 0.0);
      for (int q = 0; q < m; ++q) {
        const int r = order_row[q];
        double acc = r == e ? 1.0 : 0.0;
        for (const auto& [i, v] : rows[r])
          if (i != order_pos[q]) acc -= v * x[i];
        x[order_pos[q]] = acc / order_piv[q];
      }
      std::copy(x.begin(), x.end(), &binv[static_cast<size_t>(e) * m]);
    }
    updates_since_refactor = 0;
    return true;
  }

  // Installs a caller-supplied basis over all current rows.  Returns false
  // when the named columns are singular, in which case the caller should
  // fall back to the all-slack start.
  bool install_hint(std::vector<int> hint) {
    m = rows_total();
    if (static_cast<int>(hint.size()) != m)
      throw std::invalid_argument("set_basis: need exactly one column per row");
    state.assign(vars_total(), kAtLower);
    for (int j = 0; j < vars_total(); ++j)
      if (var_lo(j) <= -kInf) state[j] = kAtUpper;
    basic = std::move(hint);
    basic_pos.assign(vars_total(), -1);
    for (int i = 0; i < m; ++i) {
      const int j = basic[i];
      if (j < 0 || j >= vars_total() || basic_pos[j] >= 0)
        throw std::invalid_argument("set_basis: column out of range or repeated");
      basic_pos[j] = i;
      state[j] = kBasic;
    }
    if (!triangular_binv()) {
      try {
        refactor();
      } catch (const std::runtime_error&) {
        return false;
      }
    }
    xb.assign(m, 0.0);
    recompute_basics();
    has_basis = true;
    return true;
  }

  // Grows the basis by the rows added since the last solve; every new
  // row enters with its slack basic.
  void weave_pending_rows() {
    const int m_new = rows_total();
    if (m_new == m) return;
    const int m_old = m;
    std::vector<double> grown(static_cast<size_t>(m_new) * m_new, 0.0);
    for (int k = 0; k < m_old; ++k)
      std::copy_n(&binv[static_cast<size_t>(k) * m_old], m_old,
                  &grown[static_cast<size_t>(k) * m_new]);
    // Inverse rows for the new slots: -R B^{-1} over old columns, then the
    // identity block.  R has entries only where a structural basic carries
    // a coefficient in the new row.
    for (int p = m_old; p < m_new; ++p) {
      std::vector<double> rb(m_old, 0.0);
      bool any = false;
      // Pending-row coefficients live in the structural columns.
      for (int j = 0; j < n_struct; ++j) {
        if (state.empty() || state[j] != kBasic) continue;
        for (const auto& [r, v] : cols[j])
          if (r == p) {
            rb[basic_pos[j]] = v;
            any = true;
          }
      }
      if (any)
        for (int k = 0; k < m_old; ++k) {
          const double* col = &grown[static_cast<size_t>(k) * m_new];
          double acc = 0.0;
          for (int i = 0; i < m_old; ++i) acc += rb[i] * col[i];
          grown[static_cast<size_t>(k) * m_new + p] = -acc;
        }
      grown[static_cast<size_t>(p) * m_new + p] = 1.0;
    }
    binv = std::move(grown);

    // Slack indices shift: slack of old row i moves from n_struct_old + i
    // only when columns were inserted, which never happens; here only m
    // grows, so previously basic slacks keep their indices.
    m = m_new;
    state.resize(vars_total(), kAtLower);
    basic_pos.assign(vars_total(), -1);
    basic.resize(m);
    for (int i = 0; i < m_old; ++i) basic_pos[basic[i]] = i;
    for (int i = m_old; i < m; ++i) {
      const int sj = n_struct + i;
      basic[i] = sj;
      basic_pos[sj] = i;
      state[sj] = kBasic;
    }
    // Re-mark basic states (structural ones were preserved in `state`).
    for (int i = 0; i < m; ++i) state[basic[i]] = kBasic;
    xb.assign(m, 0.0);
    recompute_basics();
  }

  // Flips nonbasic variables whose reduced-cost sign no longer matches
  // their bound.  Returns false when a flip is impossible (infinite
  // opposite bound), which forces a cold restart.
  bool flip_to_dual_feasible(const std::vector<double>& y) {
    const double dtol = opts.dual_tol * (1.0 + max_cost_scale());
    bool ok = true;
    for (int j = 0; j < vars_total(); ++j) {
      if (state[j] == kBasic) continue;
      if (var_lo(j) == var_hi(j)) continue;  // fixed: any sign is fine
      const double d = reduced_cost(j, y);
      if (state[j] == kAtLower && d < -dtol) {
        if (var_hi(j) < kInf) state[j] = kAtUpper;
        else ok = false;
      } else if (state[j] == kAtUpper && d > dtol) {
        if (var_lo(j) > -kInf) state[j] = kAtLower;
        else ok = false;
      }
    }
    return ok;
  }

  double max_cost_scale() const {
    double s = 0.0;
    for (int j = 0; j < n_struct; ++j) s = std::max(s, std::abs(cost[j]));
    return s;
  }

  double rhs_scale() const {
    double s = 0.0;
    for (double r : rhs) s = std::max(s, std::abs(r));
    return s;
  }

  Status dual_simplex() {
    const double ftol = opts.feas_tol * (1.0 + rhs_scale());
    const double ptol = opts.pivot_tol;
    using Clock = std::chrono::steady_clock;
    const bool timed = opts.time_limit < kInf;
    const auto deadline =
        timed ? Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opts.time_limit))
              : Clock::time_point::max();
    std::vector<double> y, w(m), rho(m);
    // Columns whose fresh pivot column disagreed with the inverse row are
    // excluded until the next successful pivot (generation bump resets).
    std::vector<uint32_t> ban(vars_total(), 0);
    uint32_t ban_gen = 1;
    int stall = 0;
    bool bland = false;
    int repairs = 0;
    int iters_here = 0;
    int n_refactor = 0, n_ban = 0, n_pivot = 0;
    const bool trace = std::getenv("HUBQ_LP_TRACE") != nullptr;
    if (updates_since_refactor >= opts.refactor_every) {
      refactor();
      recompute_basics();
      ++n_refactor;
    }
    // Duals are maintained incrementally across pivots and refreshed from
    // scratch whenever the inverse is rebuilt.
    compute_duals(y);
    while (true) {
      if (trace && iters_here % 200 == 0)
        std::fprintf(stderr,
                     "  lp iter=%d m=%d pivots=%d bans=%d refactors=%d stall=%d\n",
                     iters_here, m, n_pivot, n_ban, n_refactor, stall);
      if (iters_here >= opts.max_iterations) return Status::IterationLimit;
      if (timed && (iters_here & 127) == 0 && Clock::now() >= deadline)
        return Status::TimeLimit;

      // Leaving row: largest bound violation among basics.
      int r = -1;
      double worst = ftol;
      for (int i = 0; i < m; ++i) {
        const int j = basic[i];
        const double below = var_lo(j) - xb[i];
        const double above = xb[i] - var_hi(j);
        const double v = std::max(below, above);
        if (v > worst || (bland && v > ftol)) {
          worst = v;
          r = i;
          if (bland) break;
        }
      }
      if (r < 0) {
        // Primal feasible; verify once before declaring optimality.  Small
        // bases afford a fresh factorization; large ones settle for basic
        // values recomputed from the maintained inverse, whose drift the
        // periodic refactor bounds.
        if (repairs < 3) {
          ++repairs;
          if (m <= 600) {
            refactor();
            ++n_refactor;
            compute_duals(y);
          }
          recompute_basics();
          bool clean = true;
          for (int i = 0; i < m && clean; ++i) {
            const int j = basic[i];
            if (xb[i] < var_lo(j) - ftol || xb[i] > var_hi(j) + ftol) clean = false;
          }
          if (!clean) continue;
        }
        return Status::Optimal;
      }

      const int leaving = basic[r];
      const bool to_lower = xb[r] < var_lo(leaving);
      const double target = to_lower ? var_lo(leaving) : var_hi(leaving);

      // rho = row r of the inverse; alpha_j = rho . a_j.
      for (int k = 0; k < m; ++k) rho[k] = binv[static_cast<size_t>(k) * m + r];

      int q = -1;
      double best_ratio = kInf;
      double best_alpha = 0.0;
      int q_dir = 0;
      // Two-tier entering scan: borderline pivot elements first stay out of
      // the ratio test entirely; the loose pass only runs when the strict
      // one finds nothing, so near-zero alphas cannot flood the selection.
      auto scan = [&](double atol) {
        for (int j = 0; j < vars_total(); ++j) {
          if (state[j] == kBasic || var_lo(j) == var_hi(j)) continue;
          if (ban[j] == ban_gen) continue;
          double a = 0.0;
          for_entries(j, [&](int row, double v) { a += rho[row] * v; });
          int dir;
          if (state[j] == kAtLower) {
            // moving up changes xb_r by -a * t
            if (to_lower ? a >= -atol : a <= atol) continue;
            dir = 1;
          } else {
            if (to_lower ? a <= atol : a >= -atol) continue;
            dir = -1;
          }
          const double d = reduced_cost(j, y);
          const double num =
              state[j] == kAtLower ? std::max(d, 0.0) : std::max(-d, 0.0);
          const double ratio = num / std::abs(a);
          const bool better =
              bland ? (q < 0)
                    : (ratio < best_ratio - 1e-12 ||
                       (ratio < best_ratio + 1e-12 &&
                        (std::abs(a) > std::abs(best_alpha) ||
                         (std::abs(a) == std::abs(best_alpha) && j < q))));
          if (better) {
            q = j;
            best_ratio = ratio;
            best_alpha = a;
            q_dir = dir;
            if (bland) break;
          }
        }
      };
      scan(1e-7);
      if (q < 0) scan(ptol);
      if (q < 0) return Status::Infeasible;

      ftran(q, w);
      const double piv = w[r];
      // The fresh pivot must be large enough and push the leaving value
      // toward its violated bound; an opposite sign would swap the basis
      // without progress and can cycle.  Either failure means the column
      // disagrees with the inverse row: rebuild when enough updates have
      // accumulated to explain the drift, otherwise exclude the column.
      const double dpiv = q_dir * piv;
      if (to_lower ? dpiv > -ptol : dpiv < ptol) {
        if (updates_since_refactor >= 20) {
          refactor();
          recompute_basics();
          compute_duals(y);
          ++n_refactor;
        } else {
          ban[q] = ban_gen;
          ++n_ban;
        }
        ++iters_here;
        if (++stall > 50) bland = true;
        continue;
      }

      // Dual update: the entering reduced cost must drop to zero, and rho
      // moves no other basic reduced cost, so one O(m) step keeps y exact.
      const double dq = reduced_cost(q, y);
      const double gq = dq / piv;
      if (gq != 0.0)
        for (int i = 0; i < m; ++i) y[i] += gq * rho[i];

      const double t = (xb[r] - target) / (q_dir * piv);
      const double step = std::max(t, 0.0);
      ++iterations;
      ++iters_here;
      ++n_pivot;
      ++ban_gen;  // pivot accepted: excluded columns become eligible again
      if (step <= 1e-12) {
        if (++stall > 2000) bland = true;
      } else {
        stall = 0;
      }

      for (int i = 0; i < m; ++i) xb[i] -= q_dir * step * w[i];
      xb[r] = nonbasic_value(q) + q_dir * step;
      state[leaving] = to_lower ? kAtLower : kAtUpper;
      state[q] = kBasic;
      basic_pos[leaving] = -1;
      basic[r] = q;
      basic_pos[q] = r;
      update_binv(r, w);

      if (updates_since_refactor >= opts.refactor_every) {
        refactor();
        recompute_basics();
        compute_duals(y);
        ++n_refactor;
      }
    }
  }

  // Prepares a warm start from the current basis.  Stale inverses yield
  // wrong duals, and a wrong dual must not demote the start to cold, so a
  // failed flip is retried once after a fresh factorization.
  void warm_prepare() {
    std::vector<double> y;
    compute_duals(y);
    if (!flip_to_dual_feasible(y)) {
      bool rescued = false;
      if (updates_since_refactor > 0) {
        try {
          refactor();
          compute_duals(y);
          rescued = flip_to_dual_feasible(y);
        } catch (const std::runtime_error&) {
          rescued = false;
        }
      }
      if (!rescued) {
        if (std::getenv("HUBQ_LP_TRACE"))
          std::fprintf(stderr, "  lp warm start demoted to cold (m=%d)\n", m);
        cold_basis();
        return;
      }
    }
    recompute_basics();
  }

  Solution run() {
    Solution sol;
    if (!pending_basis.empty()) {
      std::vector<int> hint = std::move(pending_basis);
      pending_basis.clear();
      if (install_hint(std::move(hint))) {
        warm_prepare();
      } else {
        cold_basis();
      }
    } else if (!has_basis) {
      cold_basis();
    } else {
      weave_pending_rows();
      warm_prepare();
    }
    Status st = dual_simplex();
    if (st == Status::IterationLimit) {
      // One cold retry; pathological bases from long warm-start chains are
      // cheaper to rebuild than to rescue.
      cold_basis();
      st = dual_simplex();
    }
    sol.status = st;
    sol.iterations = iterations;
    if (st != Status::Optimal) return sol;
    sol.x.resize(n_struct);
    for (int j = 0; j < n_struct; ++j)
      sol.x[j] = state[j] == kBasic ? xb[basic_pos[j]] : nonbasic_value(j);
    for (int j = 0; j < n_struct; ++j) {
      if (sol.x[j] < lo[j] && sol.x[j] > lo[j] - 1e-7) sol.x[j] = lo[j];
      if (sol.x[j] > hi[j] && sol.x[j] < hi[j] + 1e-7) sol.x[j] = hi[j];
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_struct; ++j) sol.objective += cost[j] * sol.x[j];
    return sol;
  }
};

IncrementalSolver::IncrementalSolver(const Problem& p, const Options& opts)
    : impl_(new Impl) {
  impl_->opts = opts;
  impl_->n_struct = p.num_vars();
  impl_->cols.resize(p.num_vars());
  impl_->cost.resize(p.num_vars());
  impl_->lo.resize(p.num_vars());
  impl_->hi.resize(p.num_vars());
  for (int j = 0; j < p.num_vars(); ++j) {
    impl_->cols[j] = p.column(j);
    impl_->cost[j] = p.cost(j);
    impl_->lo[j] = p.lower(j);
    impl_->hi[j] = p.upper(j);
    if (p.cost(j) < 0.0 && p.upper(j) >= kInf)
      throw std::invalid_argument(
          "IncrementalSolver: negative-cost variable needs a finite upper bound");
  }
  impl_->sense.resize(p.num_rows());
  impl_->rhs.resize(p.num_rows());
  for (int i = 0; i < p.num_rows(); ++i) {
    impl_->sense[i] = p.sense(i);
    impl_->rhs[i] = p.rhs(i);
  }
}

IncrementalSolver::~IncrementalSolver() = default;
IncrementalSolver::IncrementalSolver(IncrementalSolver&&) noexcept = default;
IncrementalSolver& IncrementalSolver::operator=(IncrementalSolver&&) noexcept = default;

void IncrementalSolver::set_bounds(int col, double lo, double hi) {
  assert(col >= 0 && col < impl_->n_struct && lo <= hi);
  impl_->lo[col] = lo;
  impl_->hi[col] = hi;
}

double IncrementalSolver::lower(int col) const { return impl_->lo[col]; }
double IncrementalSolver::upper(int col) const { return impl_->hi[col]; }

int IncrementalSolver::add_row(RowSense sense, double rhs,
                               std::vector<std::pair<int, double>> terms) {
  const int row = impl_->rows_total();
  impl_->sense.push_back(sense);
  impl_->rhs.push_back(rhs);
  for (const auto& [col, coef] : terms) {
    assert(col >= 0 && col < impl_->n_struct);
    if (coef != 0.0) impl_->cols[col].emplace_back(row, coef);
  }
  return row;
}

void IncrementalSolver::set_basis(const std::vector<int>& basic_columns) {
  impl_->pending_basis = basic_columns;
}

void IncrementalSolver::set_time_limit(double seconds) {
  impl_->opts.time_limit = seconds;
}

int IncrementalSolver::num_rows() const { return impl_->rows_total(); }
int IncrementalSolver::num_vars() const { return impl_->n_struct; }

Solution IncrementalSolver::solve() { return impl_->run(); }

}  // namespace hubq::lp
