// SPDX-License-Identifier: Apache-2.0
#include "hubq/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>

#include "hubq/errors.hpp"

namespace hubq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string gap_suffix(double gap) {
  if (!std::isfinite(gap)) return "gap=inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "gap=%.4f", gap);
  return buf;
}

CapacityProfile uncapacitated_profile(const ServerBank& bank) {
  CapacityProfile cap;
  cap.lambda_max.resize(bank.hubs());
  cap.beta.resize(bank.hubs());
  cap.hub_cap.assign(bank.hubs(), kInf);
  for (int k = 0; k < bank.hubs(); ++k) {
    const auto& servers = bank.at(k);
    cap.lambda_max[k].assign(servers.size(), kInf);
    cap.beta[k].reserve(servers.size());
    for (const Server& s : servers) cap.beta[k].push_back(s.beta);
  }
  return cap;
}

struct Cell {
  double alpha;
  int p;
  int b;
};

void run_cell(const Instance& inst, const SweepGrid& grid, const Cell& cell,
              double gamma, bool solo, ReportRow& row, HubDesign& design) {
  ScenarioConfig cfg = grid.base;
  cfg.alpha = cell.alpha;
  cfg.p = cell.p;
  cfg.b = cell.b;
  cfg.gamma = gamma;
  if (!solo) cfg.jobs = 1;  // the sweep already parallelizes across cells

  row.alpha = cell.alpha;
  row.p = cell.p;
  row.b = cell.b;
  row.theta = cfg.theta;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const NetworkInstance net = build_network(inst, cfg);
    const ServerBank bank = build_bank(inst, cfg);
    const CapacityProfile cap = capacity_profile(bank, cfg.epsilon);
    const Matrix arrivals = derive_arrivals(inst.flow, gamma);
    design = solve_design(net, arrivals, cap, cfg);

    row.objective = design.objective;
    row.hubs = design.hubs;
    row.transport_cost = design.transport_cost;
    row.hub_fixed_cost = design.hub_fixed_cost;
    row.arc_fixed_cost = design.arc_fixed_cost;
    row.status = to_string(design.status);
    if (design.status == SolveStatus::TimeLimit)
      row.status += "(" + gap_suffix(design.gap) + ")";
  } catch (const std::exception& e) {
    row.status = std::string("error(") + e.what() + ")";
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double calibrate_gamma(const Instance& inst, const ScenarioConfig& base,
                       double target_load) {
  if (!(target_load > 0.0 && target_load < 1.0))
    throw ValidationError("calibration target load must be in (0, 1)");
  ScenarioConfig cfg = base;
  cfg.alpha = 0.2;
  cfg.p = std::min(4, inst.n);
  cfg.gamma = 1.0;
  cfg.time_limit = kInf;
  // Uncapacitated allocations always take the closed-form routing, so plain
  // enumeration beats tree search on this uncoupled relaxation.
  cfg.strategy = Strategy::Enumerate;
  cfg.enum_cap = std::max<long>(cfg.enum_cap, 20000);

  const NetworkInstance net = build_network(inst, cfg);
  const ServerBank bank = build_bank(inst, cfg);
  const CapacityProfile caps = capacity_profile(bank, cfg.epsilon);
  const Matrix arrivals = derive_arrivals(inst.flow, 1.0);
  const HubDesign d =
      solve_design(net, arrivals, uncapacitated_profile(bank), cfg);
  if (d.status != SolveStatus::Optimal)
    throw ValidationError(std::string("gamma calibration solve ended ") +
                          to_string(d.status));

  double busiest = 0.0;
  for (int k : d.hubs) {
    const auto& lm = caps.lambda_max[k];
    for (size_t l = 0; l < lm.size(); ++l)
      if (std::isfinite(lm[l]) && lm[l] > 0.0)
        busiest = std::max(busiest, caps.beta[k][l] * d.hub_arrivals[k] / lm[l]);
  }
  if (busiest <= 0.0) return 1.0;
  return target_load / busiest;
}

SweepResult run_sweep(const Instance& inst, const SweepGrid& grid,
                      std::optional<double> gamma_explicit) {
  if (grid.alphas.empty() || grid.ps.empty() || grid.bs.empty())
    throw ValidationError("sweep: alpha, p, and b lists must be nonempty");

  SweepResult out;
  if (gamma_explicit) {
    out.gamma = *gamma_explicit;
  } else if (inst.gamma) {
    out.gamma = *inst.gamma;
  } else {
    out.gamma = calibrate_gamma(inst, grid.base);
    out.gamma_calibrated = true;
  }
  if (!(out.gamma > 0.0)) throw ValidationError("sweep: gamma must be positive");

  std::vector<Cell> cells;
  for (double alpha : grid.alphas)
    for (int p : grid.ps)
      for (int b : grid.bs) cells.push_back({alpha, p, b});

  out.rows.resize(cells.size());
  out.designs.resize(cells.size());

  const int jobs = std::max(1, std::min<int>(grid.base.jobs,
                                             static_cast<int>(cells.size())));
  if (jobs == 1) {
    for (size_t i = 0; i < cells.size(); ++i)
      run_cell(inst, grid, cells[i], out.gamma, true, out.rows[i], out.designs[i]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int tnum = 0; tnum < jobs; ++tnum)
      pool.emplace_back([&, tnum] {
        for (size_t i = tnum; i < cells.size(); i += jobs)
          run_cell(inst, grid, cells[i], out.gamma, false, out.rows[i],
                   out.designs[i]);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

void write_nodes_csv(std::ostream& os, const Instance& inst) {
  if (inst.coords.rows() != inst.n)
    throw ValidationError("plot data: instance has no coordinates");
  os << "node,x,y\n";
  for (int i = 0; i < inst.n; ++i)
    os << i << ',' << format_real(inst.coords(i, 0)) << ','
       << format_real(inst.coords(i, 1)) << '\n';
}

void write_arcs_csv(std::ostream& os, const Instance& inst,
                    const SweepResult& result) {
  const Matrix w_sym = symmetrize_flows(inst.flow);
  os << "alpha,p,b,src,dst,kind,flow\n";
  for (size_t idx = 0; idx < result.rows.size(); ++idx) {
    const ReportRow& row = result.rows[idx];
    const HubDesign& d = result.designs[idx];
    if (d.hubs.empty()) continue;
    // kind=hub sorts ahead of kind=spoke per edge; a map keeps the file
    // deterministic regardless of routing order.
    std::map<std::tuple<int, int, int>, double> edges;
    for (const RoutingEntry& e : d.routing) {
      const double flow = w_sym(e.q.i, e.q.j) * e.x;
      if (flow <= 0.0) continue;
      auto leg = [&](int a, int b, int kind) {
        if (a == b) return;
        edges[{std::min(a, b), std::max(a, b), kind}] += flow;
      };
      leg(e.q.i, e.q.k, 1);
      leg(e.q.k, e.q.m, 0);
      leg(e.q.m, e.q.j, 1);
    }
    for (const auto& [key, flow] : edges) {
      const auto [a, b, kind] = key;
      os << format_real(row.alpha) << ',' << row.p << ',' << row.b << ',' << a
         << ',' << b << ',' << (kind == 0 ? "hub" : "spoke") << ','
         << format_real(flow) << '\n';
    }
  }
}

}  // namespace hubq
