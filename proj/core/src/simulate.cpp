// SPDX-License-Identifier: Apache-2.0
#include "hubq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>
#include <vector>

#include "hubq/errors.hpp"
#include "hubq/rng.hpp"

namespace hubq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check(const SimConfig& cfg) {
  if (!(cfg.spec.lambda >= 0.0))
    throw ValidationError("sim: lambda must be nonnegative");
  if (!(cfg.spec.mu > 0.0)) throw ValidationError("sim: mu must be positive");
  if (!(cfg.spec.c >= 0.0)) throw ValidationError("sim: c must be nonnegative");
  if (!(cfg.warmup >= 0.0)) throw ValidationError("sim: warmup must be nonnegative");
  if (!(cfg.horizon > cfg.warmup))
    throw ValidationError("sim: horizon must exceed warmup");
  if (cfg.replications < 1)
    throw ValidationError("sim: at least one replication is required");
}

// Time-weighted occupancy of one replication, normalized to fractions.
std::vector<double> simulate_one(const SimConfig& cfg, int rep) {
  SplitMix64 rng(cfg.seed, static_cast<uint64_t>(rep));
  const double lambda = cfg.spec.lambda;
  const double mu = cfg.spec.mu;
  const double c = cfg.spec.c;

  std::vector<double> occ(8, 0.0);
  std::vector<double> svc_rate{0.0};  // svc_rate[n] = n^c * mu, grown lazily
  double t = 0.0;
  int state = 0;
  while (t < cfg.horizon) {
    while (state >= static_cast<int>(svc_rate.size()))
      svc_rate.push_back(std::pow(static_cast<double>(svc_rate.size()), c) * mu);
    const double rate = lambda + svc_rate[state];
    const double next =
        rate > 0.0 ? t + rng.next_exponential(rate) : cfg.horizon;
    const double lo = std::max(t, cfg.warmup);
    const double hi = std::min(next, cfg.horizon);
    if (hi > lo) {
      if (state >= static_cast<int>(occ.size())) occ.resize(state + 1, 0.0);
      occ[state] += hi - lo;
    }
    if (next >= cfg.horizon) break;
    t = next;
    if (rng.next_unit() * rate <= lambda)
      ++state;
    else
      --state;
  }

  // Normalizing by the accumulated total rather than horizon - warmup
  // keeps the fractions summing to 1 under rounding.
  double total = 0.0;
  for (double v : occ) total += v;
  for (double& v : occ) v /= total;
  while (occ.size() > 1 && occ.back() == 0.0) occ.pop_back();
  return occ;
}

}  // namespace

double student_t95(int df) {
  // Two-sided 95% quantiles; beyond the table the normal value is close
  // enough for a confidence interval.
  static constexpr double kTable[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return kInf;
  if (df <= 30) return kTable[df - 1];
  return 1.960;
}

double SimEstimate::tail_at(int b) const {
  double sum = 0.0;
  for (const auto& rep : replication_fractions) {
    double head = 0.0;
    const int last = std::min<int>(b + 1, static_cast<int>(rep.size()) - 1);
    for (int s = 0; s <= last; ++s) head += rep[s];
    sum += 1.0 - head;
  }
  return sum / static_cast<double>(replication_fractions.size());
}

double SimEstimate::tail_half_width(int b) const {
  const int r = static_cast<int>(replication_fractions.size());
  if (r < 2) return kInf;
  const double mean = tail_at(b);
  double ss = 0.0;
  for (const auto& rep : replication_fractions) {
    double head = 0.0;
    const int last = std::min<int>(b + 1, static_cast<int>(rep.size()) - 1);
    for (int s = 0; s <= last; ++s) head += rep[s];
    const double d = (1.0 - head) - mean;
    ss += d * d;
  }
  return t95 * std::sqrt(ss / (r - 1)) / std::sqrt(static_cast<double>(r));
}

SimEstimate run_sim(const SimConfig& cfg) {
  check(cfg);
  const int reps = cfg.replications;
  std::vector<std::vector<double>> fractions(reps);

  const int jobs = std::max(1, std::min<int>(
      reps, static_cast<int>(std::thread::hardware_concurrency())));
  if (jobs == 1) {
    for (int r = 0; r < reps; ++r) fractions[r] = simulate_one(cfg, r);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int tnum = 0; tnum < jobs; ++tnum)
      pool.emplace_back([&, tnum] {
        try {
          for (int r = tnum; r < reps; r += jobs)
            fractions[r] = simulate_one(cfg, r);
        } catch (...) {
          errors[tnum] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  size_t states = 1;
  for (const auto& f : fractions) states = std::max(states, f.size());
  for (auto& f : fractions) f.resize(states, 0.0);

  SimEstimate est;
  est.replication_fractions = std::move(fractions);
  est.t95 = student_t95(reps - 1);
  est.state_fractions.assign(states, 0.0);
  est.half_width.assign(states, reps < 2 ? kInf : 0.0);
  for (size_t s = 0; s < states; ++s) {
    double mean = 0.0;
    for (const auto& f : est.replication_fractions) mean += f[s];
    mean /= reps;
    est.state_fractions[s] = mean;
    if (reps >= 2) {
      double ss = 0.0;
      for (const auto& f : est.replication_fractions) {
        const double d = f[s] - mean;
        ss += d * d;
      }
      est.half_width[s] =
          est.t95 * std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps));
    }
  }
  return est;
}

std::vector<ServerValidation> validate_design(const HubDesign& design,
                                              const ServerBank& bank,
                                              const SimConfig& base) {
  std::vector<ServerValidation> table;
  uint64_t ordinal = 0;
  for (int k : design.hubs) {
    const auto& servers = bank.at(k);
    for (size_t l = 0; l < servers.size(); ++l) {
      const Server& sv = servers[l];
      ServerValidation row;
      row.hub = k;
      row.server = static_cast<int>(l);
      row.lambda = design.server_arrivals[k][l];
      row.theta = sv.theta;

      QueueSpec qs{row.lambda, sv.mu, bank.c()};
      try {
        const SteadyState ss = steady_state(qs, kDefaultEpsilon, sv.b + 2);
        row.analytic_tail = 1.0 - head_probability(ss, sv.b);
      } catch (const DivergentSeries&) {
        row.analytic_tail = 1.0;
      }

      SimConfig cfg = base;
      cfg.spec = qs;
      cfg.seed = base.seed + ordinal;
      const SimEstimate est = run_sim(cfg);
      row.sim_tail = est.tail_at(sv.b);
      row.half_width = est.tail_half_width(sv.b);
      row.ok = row.sim_tail <= row.theta + kTailSlackWidths * row.half_width;
      table.push_back(row);
      ++ordinal;
    }
  }
  return table;
}

void write_validation_csv(std::ostream& os,
                          const std::vector<ServerValidation>& table) {
  os << "hub,server,lambda,theta,analytic_tail,sim_tail,half_width,ok\n";
  for (const ServerValidation& row : table) {
    os << row.hub << ',' << row.server << ',' << format_real(row.lambda) << ','
       << format_real(row.theta) << ',' << format_real(row.analytic_tail) << ','
       << format_real(row.sim_tail) << ',' << format_real(row.half_width) << ','
       << (row.ok ? 1 : 0) << '\n';
  }
}

}  // namespace hubq
