// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hubq/instances.hpp"
#include "hubq/queueing.hpp"
#include "hubq/solver.hpp"

namespace hubq {

/// One simulated server.  Time is continuous; horizon and warmup are in
/// the same periods as the rates in spec.
struct SimConfig {
  QueueSpec spec;
  double horizon = 2e5;   // simulated periods, > warmup
  double warmup = 2e3;    // initial periods discarded, >= 0
  uint64_t seed = 1;
  int replications = 8;   // >= 1; independent streams, see run_sim
};

/// Time-average state occupancy with replication-based confidence
/// intervals.  All vectors share one length: the highest state any
/// replication visited plus one.  Estimates are means over replications;
/// half_width holds two-sided 95% Student-t half-widths (infinite for a
/// single replication).
struct SimEstimate {
  std::vector<double> state_fractions;
  std::vector<double> half_width;
  std::vector<std::vector<double>> replication_fractions;  // [rep][state]
  double t95 = 0.0;  // quantile used for the half-widths

  /// Estimated probability of strictly more than b+1 entities present,
  /// the empirical counterpart of the tail the chance constraint bounds.
  double tail_at(int b) const;
  double tail_half_width(int b) const;
};

/// Two-sided 95% Student-t quantile for the given degrees of freedom.
double student_t95(int df);

/// Simulates the jump chain of the birth-death queue: in state n the next
/// event arrives after an exponential holding time with rate
/// lambda + n^c * mu and is an arrival with probability lambda over that
/// total.  Occupancy is time-weighted over [warmup, horizon] and
/// normalized per replication.  Replication r draws from the SplitMix64
/// stream (seed, r), so results are bit-identical for a given config
/// regardless of thread count.  Divergent regimes are not an error; mass
/// simply drifts into ever higher states.
SimEstimate run_sim(const SimConfig& cfg);

/// One row of the design-replay comparison: a server simulated at the
/// arrival rate the design assigns to it, against its own tail budget.
struct ServerValidation {
  int hub = 0;
  int server = 0;
  double lambda = 0.0;
  double theta = 0.0;
  double analytic_tail = 0.0;  // 1 - head through b+1, 1 when divergent
  double sim_tail = 0.0;
  double half_width = 0.0;     // 95% half-width of sim_tail
  bool ok = false;             // sim_tail <= theta + kTailSlackWidths * half_width
};

/// Statistical slack applied when comparing a simulated tail against its
/// budget: three half-widths keeps the false-alarm rate negligible while
/// still catching genuine overloads.
inline constexpr double kTailSlackWidths = 3.0;

/// Replays every open server of the design at its assigned arrival rate.
/// base supplies horizon, warmup, seed and replications; base.spec is
/// ignored.  Server (k, l) simulates under seed base.seed + ordinal,
/// where ordinal counts open servers in (hub, server) order, so streams
/// never overlap across servers or replications.
std::vector<ServerValidation> validate_design(const HubDesign& design,
                                              const ServerBank& bank,
                                              const SimConfig& base);

/// CSV with header hub,server,lambda,theta,analytic_tail,sim_tail,
/// half_width,ok.  ok is 0 or 1.
void write_validation_csv(std::ostream& os,
                          const std::vector<ServerValidation>& table);

}  // namespace hubq
