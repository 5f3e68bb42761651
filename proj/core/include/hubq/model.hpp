// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "hubq/matrix.hpp"

namespace hubq {

/// One origin-destination routing choice: flow from i to j travelling
/// i -> k -> m -> j where k and m are (not necessarily distinct) hubs.
/// O-D pairs are kept with i < j; the reverse direction is aggregated
/// into the same pair.
struct FlowQuadruple {
  int i;
  int j;
  int k;
  int m;

  bool operator==(const FlowQuadruple&) const = default;
};

/// Immutable network data: distances, O-D flows, fixed costs, the
/// inter-hub discount alpha and the required hub count p.
///
/// Construction validates:
///   - dist is n x n, symmetric, nonnegative, zero diagonal
///   - flow is n x n, nonnegative
///   - hub_cost has n nonnegative entries; arc_cost is n x n, symmetric,
///     nonnegative
///   - 0 <= alpha <= 1 and 1 <= p <= n
/// No triangle inequality is assumed anywhere.
class NetworkInstance {
 public:
  NetworkInstance(Matrix dist, Matrix flow, std::vector<double> hub_cost,
                  Matrix arc_cost, double alpha, int p);

  int n() const { return n_; }
  double alpha() const { return alpha_; }
  int p() const { return p_; }

  double dist(int a, int b) const { return dist_(a, b); }
  double flow(int i, int j) const { return flow_(i, j); }
  double hub_cost(int k) const { return hub_cost_[k]; }
  double arc_cost(int k, int m) const { return arc_cost_(k, m); }

  const Matrix& dist_matrix() const { return dist_; }
  const Matrix& flow_matrix() const { return flow_; }
  const std::vector<double>& hub_costs() const { return hub_cost_; }
  const Matrix& arc_cost_matrix() const { return arc_cost_; }

  /// Number of O-D pairs with i < j.
  int pair_count() const { return n_ * (n_ - 1) / 2; }

  /// Index of pair (i, j), i < j, in row-major upper-triangle order.
  int pair_index(int i, int j) const {
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

 private:
  int n_;
  Matrix dist_;
  Matrix flow_;
  std::vector<double> hub_cost_;
  Matrix arc_cost_;
  double alpha_;
  int p_;
};

/// Per-unit-flow cost of the path i -> k -> m -> j:
///   dist(i,k) + alpha * dist(k,m) + dist(m,j).
/// For k == m the middle leg vanishes because dist(k,k) == 0.
double path_cost(const NetworkInstance& inst, const FlowQuadruple& q);

/// Materialized path costs for every quadruple (i<j, any k, any m).
/// Holds exactly pair_count * n^2 entries.
class CostTensor {
 public:
  explicit CostTensor(const NetworkInstance& inst);

  double at(int pair, int k, int m) const {
    return c_[(static_cast<size_t>(pair) * n_ + k) * n_ + m];
  }
  double at(const FlowQuadruple& q) const {
    return at(pair_of(q.i, q.j), q.k, q.m);
  }

  size_t size() const { return c_.size(); }
  int n() const { return n_; }

 private:
  int pair_of(int i, int j) const { return i * n_ - i * (i + 1) / 2 + (j - i - 1); }

  int n_;
  std::vector<double> c_;
};

/// Aggregates a (possibly directional) flow matrix onto the upper
/// triangle: out(i,j) = w(i,j) + w(j,i) for i < j, zero elsewhere.
/// Model variables exist only for i < j, so both directions of an O-D
/// pair share one set of routing variables.
Matrix symmetrize_flows(const Matrix& w_raw);

}  // namespace hubq
