// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

namespace hubq {

/// Birth-death queue with Poisson arrivals at constant rate lambda and a
/// single server whose total completion rate in state n is n^c * mu.
/// c = 0 is the classic single-server queue, c = 1 behaves like an
/// infinite-server system.
struct QueueSpec {
  double lambda = 0.0;  // arrivals per period, >= 0
  double mu = 1.0;      // base service rate with one entity present, > 0
  double c = 0.0;       // service-rate exponent, >= 0
};

/// Truncated steady-state distribution.  probs holds p_0..p_M normalized
/// over the kept states.  Under extreme overload p0 can underflow to zero
/// even though the mass near the mode stays well scaled.
struct SteadyState {
  double p0 = 1.0;
  int M = 1;                  // truncation index actually used
  std::vector<double> probs;  // size M+1
  double epsilon = 0.0;       // accuracy the truncation was run with
};

/// Queue-length requirement for one server: the stationary probability of
/// more than b entities waiting must stay below theta.  Following the
/// linearized form used throughout this code base, the "head" of the
/// distribution is summed through state b+1 and the tail starts at b+2.
struct TailConstraint {
  int b = 0;           // maximum acceptable queue length, >= 0
  double theta = 0.5;  // maximum acceptable tail probability, in (0, 1)
};

/// The geometric series for c = 0 diverges once lambda >= mu; there is no
/// steady state.
class DivergentSeries : public std::runtime_error {
 public:
  explicit DivergentSeries(const std::string& what) : std::runtime_error(what) {}
};

/// The truncation rule did not reach the requested accuracy within the
/// state cap.
class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// head_probability was asked for more states than the truncation kept.
class TruncationTooShort : public std::runtime_error {
 public:
  explicit TruncationTooShort(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDefaultEpsilon = 1e-10;
inline constexpr int kDefaultStateCap = 1'000'000;

/// Smallest s >= 1 such that successive truncated estimates of p0 differ
/// by less than epsilon.  Throws DivergentSeries for c = 0, lambda >= mu
/// and CapExceeded when s reaches m_cap first.
int truncation_index(const QueueSpec& spec, double epsilon,
                     int m_cap = kDefaultStateCap);

/// Truncated steady state:
///   p0 = [1 + sum_{n=1..M} (lambda/mu)^n / (n!)^c]^{-1}
///   p_n = (lambda/mu)^n / (n!)^c * p0
/// Terms are built by the recurrence t_n = t_{n-1} * (lambda/mu) / n^c so
/// no factorial power is ever formed explicitly.  min_states extends the
/// kept range so that probs covers at least indices 0..min_states-1.
SteadyState steady_state(const QueueSpec& spec, double epsilon,
                         int min_states = 0, int m_cap = kDefaultStateCap);

/// Head of the distribution through state b+1: sum_{s=0..b+1} p_s.
/// Requires b+1 <= ss.M; throws TruncationTooShort otherwise.
double head_probability(const SteadyState& ss, int b);

/// True iff sum_{s=0..b+1} p_s >= 1 - theta, i.e. the chance constraint
/// holds at arrival rate spec.lambda.  A divergent queue has tail mass 1
/// and maps to false.
bool tail_ok(const QueueSpec& spec, const TailConstraint& tc,
             double epsilon = kDefaultEpsilon);

/// Largest arrival rate that still satisfies the tail constraint, found by
/// exponential bracketing from mu followed by bisection (the head
/// probability is monotone nonincreasing in lambda).  tol <= 0 selects the
/// default 1e-9 * mu.  Returns +infinity when tail_ok never fails below
/// mu * bracket_factor.
double lambda_max(double mu, double c, const TailConstraint& tc,
                  double epsilon = kDefaultEpsilon, double tol = -1.0,
                  double bracket_factor = 1e12);

}  // namespace hubq
