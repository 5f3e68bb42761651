// SPDX-License-Identifier: Apache-2.0
//
// hubq: solvers and analytics for the congestion-bounded hub median
// problem.  Subcommands:
//   queue       steady state and tail probabilities of one server
//   lambda-max  largest arrival rate a server can take, single or batch
//   solve       one instance, one scenario
//   sweep       the full alpha x p x b grid with report and plot data
//   simulate    discrete-event check of a server or of a solved design
//
// Exit codes: 0 success (solve: optimal), 1 usage or input error,
// 2 infeasible, 3 time limit.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hubq/errors.hpp"
#include "hubq/instances.hpp"
#include "hubq/queueing.hpp"
#include "hubq/simulate.hpp"
#include "hubq/solver.hpp"
#include "hubq/sweep.hpp"

namespace {

using namespace hubq;

constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeLimit = 3;

Strategy strategy_from(const std::string& s) {
  if (s == "auto") return Strategy::Auto;
  if (s == "enum") return Strategy::Enumerate;
  if (s == "bnb") return Strategy::BranchAndBound;
  throw ValidationError("unknown strategy: " + s);
}

ArcCostMode arc_mode_from(const std::string& s) {
  if (s == "literal") return ArcCostMode::Literal;
  if (s == "binary") return ArcCostMode::Binary;
  throw ValidationError("unknown arc cost mode: " + s);
}

// Scenario knobs shared by solve, sweep and simulate.  Resolution order:
// flags beat the --config overlay, which beats instance scalars, which
// beat the built-in defaults.
struct ScenarioFlags {
  double alpha = 0, theta = 0, c = 0, gamma = 0, hub_cost = 0, arc_cost = 0;
  double epsilon = 0, feas_tol = 0, lp_tol = 0, time_limit = 0;
  int p = 0, b = 0, jobs = 0;
  long enum_cap = 0;
  std::string strategy = "auto";
  std::string arc_mode = "literal";
  std::string config_path;
  bool eq19 = false;

  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_c = nullptr;
  CLI::Option* o_gamma = nullptr;
  CLI::Option* o_hub_cost = nullptr;
  CLI::Option* o_arc_cost = nullptr;
  CLI::Option* o_epsilon = nullptr;
  CLI::Option* o_feas_tol = nullptr;
  CLI::Option* o_lp_tol = nullptr;
  CLI::Option* o_time_limit = nullptr;
  CLI::Option* o_p = nullptr;
  CLI::Option* o_b = nullptr;
  CLI::Option* o_jobs = nullptr;
  CLI::Option* o_enum_cap = nullptr;
  CLI::Option* o_strategy = nullptr;
  CLI::Option* o_arc_mode = nullptr;

  void add(CLI::App* cmd, bool with_cell_axes) {
    if (with_cell_axes) {
      o_alpha = cmd->add_option("--alpha", alpha, "Inter-hub discount factor");
      o_p = cmd->add_option("--p", p, "Number of hubs to open");
      o_b = cmd->add_option("--b", b, "Queue-length bound for every server");
    }
    o_theta = cmd->add_option("--theta", theta, "Tail probability budget");
    o_c = cmd->add_option("--c", c, "Service-rate exponent");
    o_gamma = cmd->add_option("--gamma", gamma, "Arrival scale, a = gamma * W");
    o_hub_cost = cmd->add_option("--hub-cost", hub_cost,
                                 "Uniform hub fixed cost when the instance has none");
    o_arc_cost = cmd->add_option("--arc-cost", arc_cost,
                                 "Uniform arc fixed cost when the instance has none");
    o_epsilon = cmd->add_option("--epsilon", epsilon, "Truncation accuracy");
    o_feas_tol = cmd->add_option("--feas-tol", feas_tol, "Capacity slack tolerance");
    o_lp_tol = cmd->add_option("--lp-tol", lp_tol, "LP optimality tolerance");
    o_time_limit = cmd->add_option("--time-limit", time_limit, "Seconds per solve");
    o_jobs = cmd->add_option("--jobs", jobs, "Worker threads");
    o_enum_cap = cmd->add_option("--enum-cap", enum_cap,
                                 "Largest C(n,p) enumeration accepts");
    o_strategy = cmd->add_option("--strategy", strategy, "auto, enum, or bnb")
                     ->check(CLI::IsMember({"auto", "enum", "bnb"}));
    o_arc_mode = cmd->add_option("--arc-mode", arc_mode, "literal or binary")
                     ->check(CLI::IsMember({"literal", "binary"}));
    cmd->add_flag("--eq19-literal", eq19,
                  "Count single-hub paths twice in hub arrivals");
    cmd->add_option("--config", config_path, "Overlay file with scenario keys")
        ->check(CLI::ExistingFile);
  }

  ScenarioConfig resolve(const Instance* inst) const {
    ScenarioConfig cfg;
    if (inst) {
      if (inst->alpha) cfg.alpha = *inst->alpha;
      if (inst->p) cfg.p = *inst->p;
      if (inst->c) cfg.c = *inst->c;
      if (inst->gamma) cfg.gamma = *inst->gamma;
      if (auto ub = inst->uniform_b()) cfg.b = *ub;
      if (auto ut = inst->uniform_theta()) cfg.theta = *ut;
    }
    if (!config_path.empty()) apply(load_config(config_path), cfg);
    if (o_alpha && o_alpha->count()) cfg.alpha = alpha;
    if (o_p && o_p->count()) cfg.p = p;
    if (o_b && o_b->count()) cfg.b = b;
    if (o_theta->count()) cfg.theta = theta;
    if (o_c->count()) cfg.c = c;
    if (o_gamma->count()) cfg.gamma = gamma;
    if (o_hub_cost->count()) cfg.hub_cost = hub_cost;
    if (o_arc_cost->count()) cfg.arc_cost = arc_cost;
    if (o_epsilon->count()) cfg.epsilon = epsilon;
    if (o_feas_tol->count()) cfg.feas_tol = feas_tol;
    if (o_lp_tol->count()) cfg.lp_tol = lp_tol;
    if (o_time_limit->count()) cfg.time_limit = time_limit;
    if (o_jobs->count()) cfg.jobs = jobs;
    if (o_enum_cap->count()) cfg.enum_cap = enum_cap;
    if (o_strategy->count()) cfg.strategy = strategy_from(strategy);
    if (o_arc_mode->count()) cfg.arc_cost_mode = arc_mode_from(arc_mode);
    cfg.eq19_literal = eq19 || cfg.eq19_literal;
    validate(cfg);
    return cfg;
  }

  // The value to hand run_sweep: set whenever gamma came from anywhere
  // other than the built-in default, so only truly-unset sweeps calibrate.
  std::optional<double> explicit_gamma(const Instance* inst) const {
    if (o_gamma->count()) return gamma;
    if (!config_path.empty()) {
      const ConfigOverlay overlay = load_config(config_path);
      if (overlay.gamma) return *overlay.gamma;
    }
    if (inst && inst->gamma) return *inst->gamma;
    return std::nullopt;
  }
};

std::string config_echo(const ScenarioConfig& cfg, const std::string& instance_path,
                        double gamma_used, bool calibrated) {
  std::ostringstream os;
  os << "instance=" << instance_path << " alpha=" << format_real(cfg.alpha)
     << " p=" << cfg.p << " b=" << cfg.b << " theta=" << format_real(cfg.theta)
     << " c=" << format_real(cfg.c) << " gamma=" << format_real(gamma_used)
     << (calibrated ? " (calibrated)" : "") << " hub_cost="
     << format_real(cfg.hub_cost) << " arc_cost=" << format_real(cfg.arc_cost)
     << " epsilon=" << format_real(cfg.epsilon) << " feas_tol="
     << format_real(cfg.feas_tol) << " lp_tol=" << format_real(cfg.lp_tol)
     << " enum_cap=" << cfg.enum_cap << " time_limit="
     << format_real(cfg.time_limit) << " jobs=" << cfg.jobs << " strategy="
     << (cfg.strategy == Strategy::Auto
             ? "auto"
             : cfg.strategy == Strategy::Enumerate ? "enum" : "bnb")
     << " eq19=" << (cfg.eq19_literal ? "literal" : "single") << " arc_mode="
     << (cfg.arc_cost_mode == ArcCostMode::Literal ? "literal" : "binary");
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

ReportRow row_from(const HubDesign& d, const ScenarioConfig& cfg, double seconds) {
  ReportRow row;
  row.alpha = cfg.alpha;
  row.p = cfg.p;
  row.b = cfg.b;
  row.theta = cfg.theta;
  row.objective = d.objective;
  row.hubs = d.hubs;
  row.transport_cost = d.transport_cost;
  row.hub_fixed_cost = d.hub_fixed_cost;
  row.arc_fixed_cost = d.arc_fixed_cost;
  row.status = to_string(d.status);
  if (d.status == SolveStatus::TimeLimit) {
    std::ostringstream gap;
    gap << "(gap=" << format_real(d.gap) << ")";
    row.status += gap.str();
  }
  row.seconds = seconds;
  return row;
}

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::TimeLimit: return kExitTimeLimit;
  }
  return kExitError;
}

// --- queue ---------------------------------------------------------------

struct QueueArgs {
  double lambda = 0.5, mu = 1.0, c = 0.0, epsilon = kDefaultEpsilon;
  int b = 5;
};

int cmd_queue(const QueueArgs& a) {
  const QueueSpec spec{a.lambda, a.mu, a.c};
  const SteadyState ss = steady_state(spec, a.epsilon, a.b + 2);
  const double head = head_probability(ss, a.b);
  std::cout << "p0 " << format_real(ss.p0) << '\n'
            << "M " << ss.M << '\n'
            << "head " << format_real(head) << '\n'
            << "tail " << format_real(1.0 - head) << '\n';
  return 0;
}

// --- lambda-max ----------------------------------------------------------

struct LambdaMaxArgs {
  double mu = 1.0, c = 0.0, theta = 0.95, epsilon = kDefaultEpsilon, tol = -1.0;
  int b = 5;
  std::string instance_path;
  CLI::Option* o_c = nullptr;
};

int cmd_lambda_max(const LambdaMaxArgs& a) {
  if (a.instance_path.empty()) {
    const double lm = lambda_max(a.mu, a.c, TailConstraint{a.b, a.theta},
                                 a.epsilon, a.tol);
    std::cout << "lambda_max " << format_real(lm) << '\n';
    return 0;
  }
  const Instance inst = load_instance(a.instance_path);
  if (inst.servers.empty())
    throw ValidationError(a.instance_path + ": no servers section");
  const double c =
      a.o_c->count() ? a.c : inst.c.value_or(ScenarioConfig{}.c);
  std::cout << "hub,server,mu,beta,b,theta,lambda_max\n";
  for (size_t k = 0; k < inst.servers.size(); ++k)
    for (size_t l = 0; l < inst.servers[k].size(); ++l) {
      const Server& sv = inst.servers[k][l];
      const double lm =
          lambda_max(sv.mu, c, TailConstraint{sv.b, sv.theta}, a.epsilon, a.tol);
      std::cout << k << ',' << l << ',' << format_real(sv.mu) << ','
                << format_real(sv.beta) << ',' << sv.b << ','
                << format_real(sv.theta) << ',' << format_real(lm) << '\n';
    }
  return 0;
}

// --- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string instance_path;
  std::string out_path;
  bool calibrate = false;
  bool timing = false;
  ScenarioFlags flags;
};

void print_design(const HubDesign& d, const CapacityProfile& cap,
                  const ServerBank& bank) {
  std::cout << "status " << to_string(d.status) << '\n';
  if (d.hubs.empty()) {
    if (d.status != SolveStatus::Optimal)
      std::cout << "lower_bound " << format_real(d.lower_bound) << '\n';
    return;
  }
  std::cout << "hubs";
  for (int k : d.hubs) std::cout << ' ' << k;
  std::cout << '\n'
            << "objective " << format_real(d.objective) << '\n'
            << "  transport " << format_real(d.transport_cost) << '\n'
            << "  hub_fixed " << format_real(d.hub_fixed_cost) << '\n'
            << "  arc_fixed " << format_real(d.arc_fixed_cost) << '\n';
  if (d.status == SolveStatus::TimeLimit)
    std::cout << "lower_bound " << format_real(d.lower_bound) << " gap "
              << format_real(d.gap) << '\n';
  std::cout << "nodes " << d.nodes << '\n';
  for (int k : d.hubs) {
    std::cout << "hub " << k << " arrival " << format_real(d.hub_arrivals[k])
              << '\n';
    const auto& servers = bank.at(k);
    for (size_t l = 0; l < servers.size(); ++l) {
      const double lam = d.server_arrivals[k][l];
      const double lm = cap.lambda_max[k][l];
      std::cout << "  server " << l << " mu " << format_real(servers[l].mu)
                << " beta " << format_real(servers[l].beta) << " lambda "
                << format_real(lam) << " lambda_max " << format_real(lm);
      if (lm > 0.0 && std::isfinite(lm))
        std::cout << " use " << format_real(lam / lm);
      std::cout << '\n';
    }
  }
}

int cmd_solve(const SolveArgs& a) {
  const Instance inst = load_instance(a.instance_path);
  ScenarioConfig cfg = a.flags.resolve(&inst);
  bool calibrated = false;
  if (a.calibrate) {
    cfg.gamma = calibrate_gamma(inst, cfg);
    calibrated = true;
  }

  const NetworkInstance net = build_network(inst, cfg);
  const ServerBank bank = build_bank(inst, cfg);
  const CapacityProfile cap = capacity_profile(bank, cfg.epsilon);
  const Matrix arrivals = derive_arrivals(inst.flow, cfg.gamma);

  const auto t0 = std::chrono::steady_clock::now();
  const HubDesign d = solve_design(net, arrivals, cap, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  print_design(d, cap, bank);

  // Timing is opt-in so that identical commands produce identical bytes.
  const ReportRow row = row_from(d, cfg, a.timing ? seconds : 0.0);
  const std::vector<std::string> comments{
      config_echo(cfg, a.instance_path, cfg.gamma, calibrated)};
  if (!a.out_path.empty()) {
    auto out = open_out(a.out_path);
    write_report(out, comments, {row});
  } else {
    write_report(std::cout, comments, {row});
  }
  return exit_code(d.status);
}

// --- sweep ---------------------------------------------------------------

struct SweepArgs {
  std::string instance_path;
  std::string out_dir = ".";
  std::vector<double> alphas;
  std::vector<int> ps;
  std::vector<int> bs;
  ScenarioFlags flags;
};

int cmd_sweep(const SweepArgs& a) {
  const Instance inst = load_instance(a.instance_path);
  SweepGrid grid;
  grid.base = a.flags.resolve(&inst);
  if (!a.alphas.empty()) grid.alphas = a.alphas;
  if (!a.ps.empty()) grid.ps = a.ps;
  if (!a.bs.empty()) grid.bs = a.bs;

  const SweepResult res = run_sweep(inst, grid, a.flags.explicit_gamma(&inst));
  if (res.gamma_calibrated)
    std::cout << "calibrated gamma " << format_real(res.gamma) << '\n';

  std::vector<std::string> comments{
      config_echo(grid.base, a.instance_path, res.gamma, res.gamma_calibrated)};
  {
    std::ostringstream os;
    os << "grid alphas=";
    for (size_t i = 0; i < grid.alphas.size(); ++i)
      os << (i ? ";" : "") << format_real(grid.alphas[i]);
    os << " ps=";
    for (size_t i = 0; i < grid.ps.size(); ++i) os << (i ? ";" : "") << grid.ps[i];
    os << " bs=";
    for (size_t i = 0; i < grid.bs.size(); ++i) os << (i ? ";" : "") << grid.bs[i];
    comments.push_back(os.str());
  }

  auto report = open_out(a.out_dir + "/report.csv");
  write_report(report, comments, res.rows);

  if (inst.coords.rows() == inst.n) {
    auto nodes = open_out(a.out_dir + "/nodes.csv");
    write_nodes_csv(nodes, inst);
    auto arcs = open_out(a.out_dir + "/arcs.csv");
    write_arcs_csv(arcs, inst, res);
  }

  for (size_t i = 0; i < res.rows.size(); ++i) {
    const ReportRow& row = res.rows[i];
    if (res.designs[i].hubs.empty()) continue;
    std::ostringstream name;
    name << a.out_dir << "/hubs_alpha" << format_real(row.alpha) << "_p" << row.p
         << "_b" << row.b << ".txt";
    auto hubs = open_out(name.str());
    for (size_t h = 0; h < res.designs[i].hubs.size(); ++h)
      hubs << (h ? " " : "") << res.designs[i].hubs[h];
    hubs << '\n';
  }

  std::cout << "wrote " << res.rows.size() << " rows to " << a.out_dir
            << "/report.csv\n";
  return 0;
}

// --- simulate ------------------------------------------------------------

struct SimulateArgs {
  // Single-server mode; c and b are borrowed from the scenario flags.
  double lambda = 0.5, mu = 1.0;
  // Shared simulation controls.
  double horizon = 2e5, warmup = 2e3;
  uint64_t seed = 1;
  int replications = 8;
  // Design-replay mode.
  std::string instance_path;
  std::string out_path;
  bool calibrate = false;
  ScenarioFlags flags;
};

int cmd_simulate_server(const SimulateArgs& a) {
  const double c = a.flags.o_c->count() ? a.flags.c : 0.0;
  const int b = a.flags.o_b->count() ? a.flags.b : ScenarioConfig{}.b;
  SimConfig cfg;
  cfg.spec = QueueSpec{a.lambda, a.mu, c};
  cfg.horizon = a.horizon;
  cfg.warmup = a.warmup;
  cfg.seed = a.seed;
  cfg.replications = a.replications;
  const SimEstimate est = run_sim(cfg);

  std::vector<double> analytic(est.state_fractions.size(), 0.0);
  bool have_analytic = true;
  try {
    const SteadyState ss = steady_state(
        cfg.spec, kDefaultEpsilon, static_cast<int>(est.state_fractions.size()));
    for (size_t s = 0; s < analytic.size(); ++s)
      analytic[s] = s < ss.probs.size() ? ss.probs[s] : 0.0;
  } catch (const DivergentSeries&) {
    have_analytic = false;
  }

  std::cout << "state,fraction,half_width,analytic\n";
  for (size_t s = 0; s < est.state_fractions.size(); ++s) {
    std::cout << s << ',' << format_real(est.state_fractions[s]) << ','
              << format_real(est.half_width[s]) << ',';
    if (have_analytic) std::cout << format_real(analytic[s]);
    std::cout << '\n';
  }
  std::cout << "tail_at_b " << format_real(est.tail_at(b)) << " half_width "
            << format_real(est.tail_half_width(b)) << '\n';
  return 0;
}

int cmd_simulate_design(const SimulateArgs& a) {
  const Instance inst = load_instance(a.instance_path);
  ScenarioConfig cfg = a.flags.resolve(&inst);
  if (a.calibrate) cfg.gamma = calibrate_gamma(inst, cfg);

  const NetworkInstance net = build_network(inst, cfg);
  const ServerBank bank = build_bank(inst, cfg);
  const CapacityProfile cap = capacity_profile(bank, cfg.epsilon);
  const Matrix arrivals = derive_arrivals(inst.flow, cfg.gamma);
  const HubDesign d = solve_design(net, arrivals, cap, cfg);
  if (d.status != SolveStatus::Optimal) {
    std::cerr << "error: solve ended " << to_string(d.status)
              << "; nothing to replay\n";
    return exit_code(d.status);
  }

  SimConfig base;
  base.horizon = a.horizon;
  base.warmup = a.warmup;
  base.seed = a.seed;
  base.replications = a.replications;
  const auto table = validate_design(d, bank, base);
  if (!a.out_path.empty()) {
    auto out = open_out(a.out_path);
    write_validation_csv(out, table);
  } else {
    write_validation_csv(std::cout, table);
  }
  int violations = 0;
  for (const auto& row : table)
    if (!row.ok) ++violations;
  if (violations > 0) {
    std::cerr << violations << " server(s) exceed their tail budget\n";
    return kExitInfeasible;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congestion-bounded hub median toolkit"};
  app.require_subcommand(1);

  QueueArgs qa;
  CLI::App* queue = app.add_subcommand("queue", "Steady state of one server");
  queue->add_option("--lambda", qa.lambda, "Arrival rate");
  queue->add_option("--mu", qa.mu, "Base service rate");
  queue->add_option("--c", qa.c, "Service-rate exponent");
  queue->add_option("--epsilon", qa.epsilon, "Truncation accuracy");
  queue->add_option("--b", qa.b, "Queue-length bound");

  LambdaMaxArgs la;
  CLI::App* lmax = app.add_subcommand("lambda-max", "Capacity of one server");
  lmax->add_option("--mu", la.mu, "Base service rate");
  la.o_c = lmax->add_option("--c", la.c, "Service-rate exponent");
  lmax->add_option("--b", la.b, "Queue-length bound");
  lmax->add_option("--theta", la.theta, "Tail probability budget");
  lmax->add_option("--epsilon", la.epsilon, "Truncation accuracy");
  lmax->add_option("--tol", la.tol, "Bisection tolerance, <= 0 for default");
  lmax->add_option("--instance", la.instance_path,
                   "Batch mode: one row per server in this file")
      ->check(CLI::ExistingFile);

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Solve one scenario");
  solve->add_option("--instance", sa.instance_path, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--out", sa.out_path, "Write the report CSV here");
  solve->add_flag("--calibrate-gamma", sa.calibrate,
                  "Scale arrivals so the busiest server sits at 0.9 lambda_max");
  solve->add_flag("--timing", sa.timing,
                  "Report wall time (off keeps reports byte-stable)");
  sa.flags.add(solve, true);

  SweepArgs wa;
  CLI::App* sweep = app.add_subcommand("sweep", "Solve the alpha x p x b grid");
  sweep->add_option("--instance", wa.instance_path, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out-dir", wa.out_dir, "Directory for report and plot data");
  sweep->add_option("--alphas", wa.alphas, "Grid values")->delimiter(',');
  sweep->add_option("--ps", wa.ps, "Grid values")->delimiter(',');
  sweep->add_option("--bs", wa.bs, "Grid values")->delimiter(',');
  wa.flags.add(sweep, false);

  SimulateArgs ma;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Discrete-event check of a server or a solved design");
  sim->add_option("--lambda", ma.lambda, "Arrival rate (server mode)");
  sim->add_option("--mu", ma.mu, "Base service rate (server mode)");
  sim->add_option("--horizon", ma.horizon, "Simulated periods");
  sim->add_option("--warmup", ma.warmup, "Discarded periods");
  sim->add_option("--seed", ma.seed, "Stream seed");
  sim->add_option("--replications", ma.replications, "Independent replications");
  CLI::Option* sim_inst =
      sim->add_option("--instance", ma.instance_path,
                      "Replay every open server of the solved design")
          ->check(CLI::ExistingFile);
  sim->add_option("--out", ma.out_path, "Write the comparison CSV here");
  sim->add_flag("--calibrate-gamma", ma.calibrate,
                "Scale arrivals before solving (replay mode)");
  ma.flags.add(sim, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (queue->parsed()) return cmd_queue(qa);
    if (lmax->parsed()) return cmd_lambda_max(la);
    if (solve->parsed()) return cmd_solve(sa);
    if (sweep->parsed()) return cmd_sweep(wa);
    if (sim->parsed()) {
      if (sim_inst->count()) return cmd_simulate_design(ma);
      return cmd_simulate_server(ma);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
