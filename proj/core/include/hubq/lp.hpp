// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace hubq::lp {

enum class RowSense { LessEqual, Equal };

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit };

struct Options {
  double feas_tol = 1e-9;    // absolute primal feasibility tolerance
  double dual_tol = 1e-9;    // reduced-cost tolerance, scaled by max |cost|
  double pivot_tol = 1e-10;  // smallest pivot element accepted
  int max_iterations = 2'000'000;
  int refactor_every = 500;  // rebuild the basis inverse this often
  // Wall-clock budget per solve() in seconds; honored by IncrementalSolver.
  double time_limit = std::numeric_limits<double>::infinity();
};

struct Solution {
  Status status = Status::Optimal;
  double objective = 0.0;
  std::vector<double> x;  // structural variables only
  int iterations = 0;
};

/// Linear program in the form
///   min c'x   s.t.  row_i: a_i'x {<=, =} b_i,   lo <= x <= hi
/// built incrementally.  Columns are stored sparse; rows may be appended
/// after columns exist (used for delayed constraint generation) and
/// bounds may be tightened between solves (used for branching).
class Problem {
 public:
  int add_variable(double cost, double lo, double hi);
  int add_row(RowSense sense, double rhs);
  /// Appends one coefficient; a (row, col) pair must be added at most once.
  void add_term(int row, int col, double coef);

  void set_bounds(int col, double lo, double hi);

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  double lower(int col) const { return lo_[col]; }
  double upper(int col) const { return hi_[col]; }
  double cost(int col) const { return cost_[col]; }
  double rhs(int row) const { return rhs_[row]; }
  RowSense sense(int row) const { return sense_[row]; }
  const std::vector<std::pair<int, double>>& column(int col) const { return cols_[col]; }

 private:
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> cost_, lo_, hi_;
  std::vector<double> rhs_;
  std::vector<RowSense> sense_;
};

/// Bounded-variable two-phase primal simplex with an explicit, product-form
/// updated basis inverse.  Deterministic: Dantzig pricing with smallest-index
/// tie-breaks and a Bland fallback after prolonged stalling.
Solution solve(const Problem& p, const Options& opts = {});

/// Stateful re-solver built around the bounded-variable dual simplex.
/// Bound changes and appended rows keep the previous basis, which makes
/// branch-and-bound node switches and delayed row generation cheap: the
/// basis stays dual feasible (after flipping any nonbasic whose reduced
/// cost has the wrong sign for its bound) and a handful of dual pivots
/// restore primal feasibility.
///
/// Requires every variable with a negative cost to have a finite upper
/// bound, so that the all-slack starting basis can be made dual feasible
/// by bound flips alone.  Throws std::invalid_argument otherwise.
class IncrementalSolver {
 public:
  explicit IncrementalSolver(const Problem& p, const Options& opts = {});
  ~IncrementalSolver();
  IncrementalSolver(IncrementalSolver&&) noexcept;
  IncrementalSolver& operator=(IncrementalSolver&&) noexcept;

  void set_bounds(int col, double lo, double hi);
  double lower(int col) const;
  double upper(int col) const;

  /// Appends a row (terms are (structural column, coefficient) pairs) and
  /// returns its index.  Takes effect at the next solve().
  int add_row(RowSense sense, double rhs, std::vector<std::pair<int, double>> terms);

  /// Starting-basis hint for the next solve(), one column per row; the
  /// slack of row i is named num_vars() + i.  Nonbasic variables start at
  /// their finite lower (else upper) bound.  A singular hint falls back
  /// to the all-slack start.  Useful when the caller knows a near-optimal
  /// basis, e.g. an unconstrained argmin that violates few rows.
  void set_basis(const std::vector<int>& basic_columns);

  /// Replaces the wall-clock budget applied to each subsequent solve().
  /// A solve that runs out returns Status::TimeLimit and no solution.
  void set_time_limit(double seconds);

  int num_rows() const;
  int num_vars() const;

  Solution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hubq::lp
