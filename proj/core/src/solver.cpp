// SPDX-License-Identifier: Apache-2.0
#include "hubq/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <thread>

#include "hubq/errors.hpp"
#include "hubq/lp.hpp"
#include "hubq/queueing.hpp"

namespace hubq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CapacityProfile capacity_profile(const ServerBank& bank, double epsilon, double tol) {
  CapacityProfile cp;
  const int n = bank.hubs();
  cp.lambda_max.resize(n);
  cp.beta.resize(n);
  cp.hub_cap.assign(n, kInf);
  for (int k = 0; k < n; ++k) {
    for (const Server& s : bank.at(k)) {
      const double lm =
          lambda_max(s.mu, bank.c(), TailConstraint{s.b, s.theta}, epsilon, tol);
      cp.lambda_max[k].push_back(lm);
      cp.beta[k].push_back(s.beta);
      if (s.beta > 0.0) cp.hub_cap[k] = std::min(cp.hub_cap[k], lm / s.beta);
    }
  }
  return cp;
}

double hub_arrival(const Routing& routing, const Matrix& a_sym, int k,
                   bool eq19_literal) {
  double rate = 0.0;
  for (const RoutingEntry& e : routing) {
    int visits = (e.q.k == k ? 1 : 0) + (e.q.m == k ? 1 : 0);
    if (visits == 2 && !eq19_literal) visits = 1;
    if (visits) rate += a_sym(e.q.i, e.q.j) * e.x * visits;
  }
  return rate;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

namespace {

// Arrival-rate coefficient of one routing variable on hub `k`'s capacity
// row: 1 per visited leg, single-hub paths count once unless the literal
// double-count is requested.
inline int visit_coeff(int k, int m, int hub, bool literal) {
  const int v = (k == hub ? 1 : 0) + (m == hub ? 1 : 0);
  return (v == 2 && !literal) ? 1 : v;
}

struct PairSpace {
  std::vector<std::pair<int, int>> ij;  // pair index -> (i, j), i < j
  explicit PairSpace(int n) {
    ij.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) ij.emplace_back(i, j);
  }
};

}  // namespace

Allocation allocation_lp(const NetworkInstance& inst, const CostTensor& ct,
                         const Matrix& w_sym, const Matrix& a_sym,
                         const std::vector<int>& hubs, const CapacityProfile& cap,
                         const ScenarioConfig& cfg) {
  if (hubs.empty()) throw ValidationError("allocation: hub set is empty");
  assert(std::is_sorted(hubs.begin(), hubs.end()));
  const int n = inst.n();
  const int h = static_cast<int>(hubs.size());
  const bool literal_arc = cfg.arc_cost_mode == ArcCostMode::Literal;
  const bool lit19 = cfg.eq19_literal;
  const PairSpace pairs(n);
  const int np = static_cast<int>(pairs.ij.size());

  Allocation out;
  out.hub_arrivals.assign(n, 0.0);
  out.routing.reserve(np);

  // Unconstrained per-pair argmin; optimal whenever it fits the caps.
  // The winning (k, m) position doubles as the warm basis when it does not.
  std::vector<int> argpos(np, -1);
  double transport = 0.0;
  double arc = 0.0;
  for (int pr = 0; pr < np; ++pr) {
    const auto [i, j] = pairs.ij[pr];
    const double w = w_sym(i, j);
    double best = kInf;
    int bk = -1, bm = -1;
    for (int ki = 0; ki < h; ++ki) {
      const int k = hubs[ki];
      for (int mi = 0; mi < h; ++mi) {
        const int m = hubs[mi];
        double eff = w * ct.at(pr, k, m);
        if (literal_arc && k == i && m == j) eff += inst.arc_cost(i, j);
        if (eff < best) {
          best = eff;
          bk = k;
          bm = m;
          argpos[pr] = ki * h + mi;
        }
      }
    }
    out.routing.push_back({FlowQuadruple{i, j, bk, bm}, 1.0});
    transport += w * ct.at(pr, bk, bm);
    if (literal_arc && bk == i && bm == j) arc += inst.arc_cost(i, j);
    const double a = a_sym(i, j);
    if (a > 0.0) {
      out.hub_arrivals[bk] += a * visit_coeff(bk, bm, bk, lit19);
      if (bm != bk) out.hub_arrivals[bm] += a;
    }
  }
  bool fits = true;
  for (int k : hubs)
    if (out.hub_arrivals[k] > cap.hub_cap[k]) {
      fits = false;
      break;
    }
  if (fits) {
    out.feasible = true;
    out.transport = transport;
    out.arc_literal = arc;
    return out;
  }

  // Capacity binds: solve the routing LP over pairs that carry flow.
  out.routing.clear();
  out.hub_arrivals.assign(n, 0.0);

  std::vector<int> active;  // pair indices entering the LP
  active.reserve(np);
  for (int pr = 0; pr < np; ++pr) {
    const auto [i, j] = pairs.ij[pr];
    if (w_sym(i, j) > 0.0 || a_sym(i, j) > 0.0) active.push_back(pr);
  }
  std::vector<int> cap_row_of(n, -1);

  lp::Problem prob;
  for (size_t r = 0; r < active.size(); ++r) prob.add_row(lp::RowSense::Equal, 1.0);
  for (int k : hubs)
    if (cap.hub_cap[k] < kInf)
      cap_row_of[k] = prob.add_row(lp::RowSense::LessEqual, cap.hub_cap[k]);

  for (size_t r = 0; r < active.size(); ++r) {
    const int pr = active[r];
    const auto [i, j] = pairs.ij[pr];
    const double w = w_sym(i, j);
    const double a = a_sym(i, j);
    for (int k : hubs)
      for (int m : hubs) {
        double cost = w * ct.at(pr, k, m);
        if (literal_arc && k == i && m == j) cost += inst.arc_cost(i, j);
        const int col = prob.add_variable(cost, 0.0, 1.0);
        prob.add_term(static_cast<int>(r), col, 1.0);
        if (a > 0.0) {
          if (k == m) {
            if (cap_row_of[k] >= 0)
              prob.add_term(cap_row_of[k], col, a * (lit19 ? 2.0 : 1.0));
          } else {
            if (cap_row_of[k] >= 0) prob.add_term(cap_row_of[k], col, a);
            if (cap_row_of[m] >= 0) prob.add_term(cap_row_of[m], col, a);
          }
        }
      }
  }

  lp::Options lopt;
  lopt.dual_tol = cfg.lp_tol;
  // Seed the dual simplex with the argmin routes basic (cap slacks cover the
  // remaining rows).  That basis is dual feasible by construction, so only
  // the violated capacity rows pivot.
  std::vector<int> basis(prob.num_rows());
  for (size_t r = 0; r < active.size(); ++r)
    basis[r] = static_cast<int>(r) * h * h + argpos[active[r]];
  for (int q = static_cast<int>(active.size()); q < prob.num_rows(); ++q)
    basis[q] = prob.num_vars() + q;
  lp::IncrementalSolver inc(prob, lopt);
  inc.set_basis(basis);
  const lp::Solution sol = inc.solve();
  if (sol.status == lp::Status::Infeasible) return out;  // feasible == false
  if (sol.status != lp::Status::Optimal)
    throw std::runtime_error("allocation: routing LP did not converge");

  out.used_lp = true;
  out.feasible = true;
  transport = 0.0;
  arc = 0.0;
  size_t rank = 0;
  for (int pr = 0; pr < np; ++pr) {
    const auto [i, j] = pairs.ij[pr];
    if (rank < active.size() && active[rank] == pr) {
      const double w = w_sym(i, j);
      const double a = a_sym(i, j);
      const size_t base = rank * static_cast<size_t>(h) * h;
      for (int ki = 0; ki < h; ++ki)
        for (int mi = 0; mi < h; ++mi) {
          const double x = sol.x[base + static_cast<size_t>(ki) * h + mi];
          if (x <= 1e-12) continue;
          const int k = hubs[ki], m = hubs[mi];
          out.routing.push_back({FlowQuadruple{i, j, k, m}, x});
          transport += w * ct.at(pr, k, m) * x;
          if (literal_arc && k == i && m == j) arc += inst.arc_cost(i, j) * x;
          out.hub_arrivals[k] += a * visit_coeff(k, m, k, lit19) * x;
          if (m != k) out.hub_arrivals[m] += a * x;
        }
      ++rank;
    } else {
      // No flow and no load: park the pair on its cheapest hub pair.
      double best = kInf;
      int bk = -1, bm = -1;
      for (int k : hubs)
        for (int m : hubs) {
          double eff = 0.0;
          if (literal_arc && k == i && m == j) eff += inst.arc_cost(i, j);
          if (eff < best) {
            best = eff;
            bk = k;
            bm = m;
          }
        }
      out.routing.push_back({FlowQuadruple{i, j, bk, bm}, 1.0});
    }
  }
  out.transport = transport;
  out.arc_literal = arc;
  return out;
}

namespace {

double hub_fixed_cost(const NetworkInstance& inst, const std::vector<int>& hubs) {
  double f = 0.0;
  for (int k : hubs) f += inst.hub_cost(k);
  return f;
}

double arc_fixed_cost(const NetworkInstance& inst, const std::vector<int>& hubs,
                      const ScenarioConfig& cfg, double arc_literal) {
  if (cfg.arc_cost_mode == ArcCostMode::Literal) return arc_literal;
  double f = 0.0;
  for (size_t a = 0; a < hubs.size(); ++a)
    for (size_t b = a + 1; b < hubs.size(); ++b)
      f += inst.arc_cost(hubs[a], hubs[b]);
  return f;
}

HubDesign make_design(const NetworkInstance& inst, const CapacityProfile& cap,
                      const ScenarioConfig& cfg, std::vector<int> hubs,
                      Allocation alloc) {
  HubDesign d;
  d.status = SolveStatus::Optimal;
  d.hubs = std::move(hubs);
  d.transport_cost = alloc.transport;
  d.hub_fixed_cost = hub_fixed_cost(inst, d.hubs);
  d.arc_fixed_cost = arc_fixed_cost(inst, d.hubs, cfg, alloc.arc_literal);
  d.objective = d.transport_cost + d.hub_fixed_cost + d.arc_fixed_cost;
  d.routing = std::move(alloc.routing);
  d.hub_arrivals = std::move(alloc.hub_arrivals);
  d.server_arrivals.resize(inst.n());
  for (int k : d.hubs) {
    const double lam = d.hub_arrivals[k];
    for (double beta : cap.beta[k]) d.server_arrivals[k].push_back(beta * lam);
  }
  d.lower_bound = d.objective;
  d.gap = 0.0;
  return d;
}

// C(n, p) with a clamp; long double is exact far beyond any usable cap.
long comb_count(int n, int p, long clamp) {
  long double c = 1.0L;
  for (int i = 1; i <= p; ++i) {
    c = c * static_cast<long double>(n - p + i) / i;
    if (c > static_cast<long double>(clamp)) return clamp + 1;
  }
  return static_cast<long>(c + 0.5L);
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

HubDesign enumerate_exact(const NetworkInstance& inst, const Matrix& arrivals,
                          const CapacityProfile& cap, const ScenarioConfig& cfg) {
  const int n = inst.n();
  const int p = inst.p();
  const long count = comb_count(n, p, cfg.enum_cap);
  if (count > cfg.enum_cap)
    throw TooLarge("enumerate: C(" + std::to_string(n) + "," + std::to_string(p) +
                   ") exceeds the cap of " + std::to_string(cfg.enum_cap));

  const Matrix w_sym = symmetrize_flows(inst.flow_matrix());
  const Matrix a_sym = symmetrize_flows(arrivals);
  const CostTensor ct(inst);

  struct Best {
    bool has = false;
    double obj = kInf;
    std::vector<int> hubs;
    Allocation alloc;
  };

  const int jobs = std::max(1, cfg.jobs);
  std::vector<Best> best(jobs);
  std::vector<std::exception_ptr> errs(jobs);

  auto worker = [&](int t) {
    try {
      std::vector<int> comb(p);
      for (int i = 0; i < p; ++i) comb[i] = i;
      long rank = 0;
      Best& b = best[t];
      while (true) {
        if (rank % jobs == t) {
          Allocation alloc = allocation_lp(inst, ct, w_sym, a_sym, comb, cap, cfg);
          if (alloc.feasible) {
            const double obj = alloc.transport + hub_fixed_cost(inst, comb) +
                               arc_fixed_cost(inst, comb, cfg, alloc.arc_literal);
            if (!b.has || obj < b.obj || (obj == b.obj && lex_less(comb, b.hubs))) {
              b.has = true;
              b.obj = obj;
              b.hubs = comb;
              b.alloc = std::move(alloc);
            }
          }
        }
        ++rank;
        // Next p-combination in lexicographic order.
        int i = p - 1;
        while (i >= 0 && comb[i] == n - p + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < p; ++j) comb[j] = comb[j - 1] + 1;
      }
    } catch (...) {
      errs[t] = std::current_exception();
    }
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  // Completion order never matters: thread-local winners are merged in
  // thread index order under the same exact comparator.
  Best overall;
  for (Best& b : best) {
    if (!b.has) continue;
    if (!overall.has || b.obj < overall.obj ||
        (b.obj == overall.obj && lex_less(b.hubs, overall.hubs))) {
      overall = std::move(b);
    }
  }

  if (!overall.has) {
    HubDesign d;
    d.status = SolveStatus::Infeasible;
    d.nodes = count;
    return d;
  }
  HubDesign d = make_design(inst, cap, cfg, std::move(overall.hubs),
                            std::move(overall.alloc));
  d.nodes = count;
  return d;
}

HubDesign solve_design(const NetworkInstance& inst, const Matrix& arrivals,
                       const CapacityProfile& cap, const ScenarioConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::Enumerate:
      return enumerate_exact(inst, arrivals, cap, cfg);
    case Strategy::BranchAndBound:
      return branch_and_bound(inst, arrivals, cap, cfg);
    case Strategy::Auto:
      break;
  }
  // Auto sweeps small subset spaces and lets bounding carry the rest.  A
  // capacitated allocation costs around a millisecond, so exhaustive search
  // stays the faster and exact choice into the tens of thousands of subsets.
  const long kAutoEnumLimit = 20000;
  const long limit = std::min(cfg.enum_cap, kAutoEnumLimit);
  if (comb_count(inst.n(), inst.p(), limit) <= limit)
    return enumerate_exact(inst, arrivals, cap, cfg);
  return branch_and_bound(inst, arrivals, cap, cfg);
}

VerifyReport verify_design(const HubDesign& design, const NetworkInstance& inst,
                           const ServerBank& bank, const Matrix& arrivals,
                           const ScenarioConfig& cfg) {
  VerifyReport rep;
  auto add = [&rep](std::string name, bool ok, double slack) {
    rep.checks.push_back({std::move(name), ok, slack});
    rep.ok = rep.ok && ok;
  };
  const int n = inst.n();
  const Matrix w_sym = symmetrize_flows(inst.flow_matrix());
  const Matrix a_sym = symmetrize_flows(arrivals);
  const CostTensor ct(inst);

  add("hub count", static_cast<int>(design.hubs.size()) == inst.p(),
      static_cast<double>(design.hubs.size()) - inst.p());

  // Per-pair routing fractions must sum to one.
  std::vector<double> pair_sum(static_cast<size_t>(n) * (n - 1) / 2, 0.0);
  for (const RoutingEntry& e : design.routing)
    pair_sum[inst.pair_index(e.q.i, e.q.j)] += e.x;
  double worst_dev = 0.0;
  for (double s : pair_sum) worst_dev = std::max(worst_dev, std::abs(s - 1.0));
  add("routing normalization", worst_dev <= 1e-6, -worst_dev);

  std::vector<char> open(n, 0);
  for (int k : design.hubs) open[k] = 1;
  double worst_closed = 0.0;
  for (const RoutingEntry& e : design.routing)
    if (e.x > 1e-9 && (!open[e.q.k] || !open[e.q.m]))
      worst_closed = std::max(worst_closed, e.x);
  add("hub support", worst_closed == 0.0, -worst_closed);

  // Tail constraints re-evaluated from the routing, analytically per
  // server, and cross-checked against the capacity-bound verdict.
  bool agree = true;
  double agree_slack = kInf;
  for (int k : design.hubs) {
    const double lam_k = hub_arrival(design.routing, a_sym, k, cfg.eq19_literal);
    const auto& servers = bank.at(k);
    for (size_t l = 0; l < servers.size(); ++l) {
      const Server& s = servers[l];
      const double lam_kl = s.beta * lam_k;
      const TailConstraint tc{s.b, s.theta};
      const QueueSpec qs{lam_kl, s.mu, bank.c()};
      bool tail_pass;
      double slack;
      try {
        const SteadyState ss = steady_state(qs, cfg.epsilon, s.b + 2);
        const double head = head_probability(ss, s.b);
        tail_pass = head >= 1.0 - s.theta;
        slack = head - (1.0 - s.theta);
      } catch (const DivergentSeries&) {
        tail_pass = false;
        slack = -(1.0 - s.theta);
      }
      add("tail hub " + std::to_string(k) + " server " + std::to_string(l),
          tail_pass, slack);

      const double lmax = lambda_max(s.mu, bank.c(), tc, cfg.epsilon);
      const bool cap_pass = lam_kl <= lmax + cfg.feas_tol;
      // The two verdicts can legitimately differ only inside the numeric
      // band around the threshold itself.
      const double margin = std::max(cfg.feas_tol, 1e-9 * (1.0 + lmax));
      if (std::abs(lam_kl - lmax) > margin && tail_pass != cap_pass) agree = false;
      agree_slack = std::min(agree_slack, lmax + cfg.feas_tol - lam_kl);
    }
  }
  add("capacity agreement", agree, agree_slack == kInf ? 0.0 : agree_slack);

  // Objective recomputation from the routing and the fixed-cost rules.
  double transport = 0.0, arc_lit = 0.0;
  for (const RoutingEntry& e : design.routing) {
    const int pr = inst.pair_index(e.q.i, e.q.j);
    transport += w_sym(e.q.i, e.q.j) * ct.at(pr, e.q.k, e.q.m) * e.x;
    if (cfg.arc_cost_mode == ArcCostMode::Literal && e.q.k == e.q.i && e.q.m == e.q.j)
      arc_lit += inst.arc_cost(e.q.i, e.q.j) * e.x;
  }
  const double obj = transport + hub_fixed_cost(inst, design.hubs) +
                     arc_fixed_cost(inst, design.hubs, cfg, arc_lit);
  const double rel = std::abs(obj - design.objective) / std::max(1.0, std::abs(obj));
  add("objective recomputation", rel <= 1e-6, -rel);

  return rep;
}

}  // namespace hubq
