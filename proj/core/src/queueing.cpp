// SPDX-License-Identifier: Apache-2.0
#include "hubq/queueing.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hubq/errors.hpp"

namespace hubq {

namespace {

constexpr double kRescaleAt = 1e250;
constexpr double kRescaleBy = 1e-250;

void check_spec(const QueueSpec& spec) {
  if (!(spec.mu > 0.0)) throw ValidationError("queue: mu must be positive");
  if (!(spec.lambda >= 0.0)) throw ValidationError("queue: lambda must be nonnegative");
  if (!(spec.c >= 0.0)) throw ValidationError("queue: c must be nonnegative");
}

void check_tail(const TailConstraint& tc) {
  if (tc.b < 0) throw ValidationError("tail constraint: b must be nonnegative");
  if (!(tc.theta > 0.0 && tc.theta < 1.0))
    throw ValidationError("tail constraint: theta must be in (0, 1)");
}

struct Series {
  std::vector<double> terms;  // t_0..t_M, shared scale
  double sum = 1.0;           // sum of terms, same scale
  double log_scale = 0.0;     // true value = scaled value * exp(log_scale)
  int M = 1;                  // stopping index of the p0 accuracy rule
};

// Accumulates t_n = rho^n / (n!)^c until two successive truncated p0
// estimates differ by less than epsilon, then keeps extending (without
// the stopping test) until min_states entries exist.  All values are
// rescaled on the fly so overload regimes cannot overflow.
Series accumulate(const QueueSpec& spec, double epsilon, int min_states, int m_cap) {
  check_spec(spec);
  if (!(epsilon > 0.0)) throw ValidationError("queue: epsilon must be positive");
  if (spec.c == 0.0 && spec.lambda >= spec.mu)
    throw DivergentSeries("c = 0 with lambda >= mu: geometric series diverges, p0 = 0");

  const double rho = spec.lambda / spec.mu;
  Series s;
  s.terms = {1.0};
  double t = 1.0;
  double prev_sum = s.sum;
  bool stopped = false;
  for (int n = 1; n <= m_cap; ++n) {
    t *= rho / std::pow(static_cast<double>(n), spec.c);
    s.terms.push_back(t);
    prev_sum = s.sum;
    s.sum += t;
    // p0 difference between truncation at n-1 and at n, in true units.
    const double diff = std::exp(-s.log_scale) * (1.0 / prev_sum - 1.0 / s.sum);
    if (diff < epsilon) {
      s.M = n;
      stopped = true;
      break;
    }
    if (s.sum > kRescaleAt) {
      for (double& x : s.terms) x *= kRescaleBy;
      t *= kRescaleBy;
      s.sum *= kRescaleBy;
      s.log_scale -= std::log(kRescaleBy);
    }
  }
  if (!stopped)
    throw CapExceeded("truncation rule did not reach epsilon within " +
                      std::to_string(m_cap) + " states");
  while (static_cast<int>(s.terms.size()) < min_states) {
    if (static_cast<int>(s.terms.size()) > m_cap)
      throw CapExceeded("requested head extends past the state cap");
    const int n = static_cast<int>(s.terms.size());
    t *= rho / std::pow(static_cast<double>(n), spec.c);
    s.terms.push_back(t);
    s.sum += t;
    if (s.sum > kRescaleAt) {
      for (double& x : s.terms) x *= kRescaleBy;
      t *= kRescaleBy;
      s.sum *= kRescaleBy;
      s.log_scale -= std::log(kRescaleBy);
    }
  }
  s.M = static_cast<int>(s.terms.size()) - 1;
  return s;
}

}  // namespace

int truncation_index(const QueueSpec& spec, double epsilon, int m_cap) {
  return accumulate(spec, epsilon, /*min_states=*/0, m_cap).M;
}

SteadyState steady_state(const QueueSpec& spec, double epsilon, int min_states, int m_cap) {
  Series s = accumulate(spec, epsilon, min_states, m_cap);
  SteadyState ss;
  ss.M = s.M;
  ss.epsilon = epsilon;
  ss.p0 = std::exp(-s.log_scale) / s.sum;
  ss.probs.resize(s.terms.size());
  for (size_t n = 0; n < s.terms.size(); ++n) ss.probs[n] = s.terms[n] / s.sum;
  return ss;
}

double head_probability(const SteadyState& ss, int b) {
  if (b < 0) throw ValidationError("head_probability: b must be nonnegative");
  if (b + 1 > ss.M)
    throw TruncationTooShort("head through state " + std::to_string(b + 1) +
                             " but truncation kept only M = " + std::to_string(ss.M));
  double head = 0.0;
  for (int n = 0; n <= b + 1; ++n) head += ss.probs[n];
  return head;
}

bool tail_ok(const QueueSpec& spec, const TailConstraint& tc, double epsilon) {
  check_tail(tc);
  try {
    const SteadyState ss = steady_state(spec, epsilon, /*min_states=*/tc.b + 2);
    return head_probability(ss, tc.b) >= 1.0 - tc.theta;
  } catch (const DivergentSeries&) {
    return false;  // all mass escapes: tail probability is 1 > theta
  }
}

double lambda_max(double mu, double c, const TailConstraint& tc, double epsilon,
                  double tol, double bracket_factor) {
  if (!(mu > 0.0)) throw ValidationError("lambda_max: mu must be positive");
  check_tail(tc);
  if (tol <= 0.0) tol = 1e-9 * mu;

  const auto ok = [&](double lambda) {
    return tail_ok(QueueSpec{lambda, mu, c}, tc, epsilon);
  };

  // tail_ok always holds at lambda = 0, so a sign change bracket exists
  // unless the constraint never fails below the cap.
  double lo = 0.0;
  double hi = mu;
  if (ok(mu)) {
    lo = mu;
    double cand = 2.0 * mu;
    while (ok(cand)) {
      lo = cand;
      cand *= 2.0;
      if (cand > mu * bracket_factor)
        return std::numeric_limits<double>::infinity();
    }
    hi = cand;
  }
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hubq
