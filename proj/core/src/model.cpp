// SPDX-License-Identifier: Apache-2.0
#include "hubq/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "hubq/errors.hpp"

namespace hubq {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

void check_square(const Matrix& m, int n, const char* name) {
  require(m.rows() == n && m.cols() == n,
          std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

void check_symmetric_nonneg(const Matrix& m, const char* name, bool zero_diag) {
  for (int a = 0; a < m.rows(); ++a) {
    if (zero_diag) require(m(a, a) == 0.0, std::string(name) + " diagonal must be zero");
    for (int b = 0; b < m.cols(); ++b) {
      require(m(a, b) >= 0.0, std::string(name) + " entries must be nonnegative");
      require(m(a, b) == m(b, a), std::string(name) + " must be symmetric");
    }
  }
}

}  // namespace

NetworkInstance::NetworkInstance(Matrix dist, Matrix flow, std::vector<double> hub_cost,
                                 Matrix arc_cost, double alpha, int p)
    : n_(dist.rows()),
      dist_(std::move(dist)),
      flow_(std::move(flow)),
      hub_cost_(std::move(hub_cost)),
      arc_cost_(std::move(arc_cost)),
      alpha_(alpha),
      p_(p) {
  require(n_ >= 1, "instance needs at least one node");
  check_square(dist_, n_, "dist");
  check_symmetric_nonneg(dist_, "dist", /*zero_diag=*/true);
  check_square(flow_, n_, "flow");
  for (double w : flow_.data()) require(w >= 0.0, "flow entries must be nonnegative");
  require(static_cast<int>(hub_cost_.size()) == n_, "fixed_hub must have n entries");
  for (double f : hub_cost_) require(f >= 0.0, "fixed_hub entries must be nonnegative");
  check_square(arc_cost_, n_, "fixed_arc");
  check_symmetric_nonneg(arc_cost_, "fixed_arc", /*zero_diag=*/false);
  require(alpha_ >= 0.0 && alpha_ <= 1.0, "alpha must be in [0, 1]");
  require(p_ >= 1 && p_ <= n_, "p must be in [1, n]");
}

double path_cost(const NetworkInstance& inst, const FlowQuadruple& q) {
  return inst.dist(q.i, q.k) + inst.alpha() * inst.dist(q.k, q.m) + inst.dist(q.m, q.j);
}

CostTensor::CostTensor(const NetworkInstance& inst) : n_(inst.n()) {
  const int n = n_;
  c_.resize(static_cast<size_t>(inst.pair_count()) * n * n);
  size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double dik = inst.dist(i, k);
        for (int m = 0; m < n; ++m) {
          c_[idx++] = dik + inst.alpha() * inst.dist(k, m) + inst.dist(m, j);
        }
      }
    }
  }
}

Matrix symmetrize_flows(const Matrix& w_raw) {
  const int n = w_raw.rows();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out(i, j) = w_raw(i, j) + w_raw(j, i);
  return out;
}

}  // namespace hubq
