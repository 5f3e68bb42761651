// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubq/instances.hpp"
#include "hubq/matrix.hpp"
#include "hubq/model.hpp"

namespace hubq {

/// enumerate_exact refuses hub-set counts beyond the configured cap.
class TooLarge : public std::runtime_error {
 public:
  explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// Per-server capacity bounds and the per-hub aggregate they imply.
/// hub_cap[k] = min over servers with beta > 0 of lambda_max / beta: the
/// largest total arrival rate hub k can accept without any of its servers
/// breaking its tail constraint.
struct CapacityProfile {
  std::vector<std::vector<double>> lambda_max;  // [hub][server]
  std::vector<std::vector<double>> beta;        // [hub][server], echoed from the bank
  std::vector<double> hub_cap;                  // [hub], +infinity when unconstrained
};

CapacityProfile capacity_profile(const ServerBank& bank,
                                 double epsilon = kDefaultEpsilon, double tol = -1.0);

/// Sparse routing: fraction of O-D pair (i, j) sent along i -> k -> m -> j.
struct RoutingEntry {
  FlowQuadruple q;
  double x = 0.0;
};
using Routing = std::vector<RoutingEntry>;

/// Total arrival rate at hub k implied by a routing over the aggregated
/// arrival matrix: first-leg visits (q.k == k) plus second-leg visits
/// (q.m == k).  A single-hub path k == m counts once; eq19_literal counts
/// it twice instead.
double hub_arrival(const Routing& routing, const Matrix& a_sym, int k,
                   bool eq19_literal = false);

enum class SolveStatus { Optimal, Infeasible, TimeLimit };

const char* to_string(SolveStatus s);

/// A solved (or partially solved) design: hub set, routing, objective
/// breakdown, and the per-hub / per-server loads the routing implies.
struct HubDesign {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<int> hubs;  // sorted ascending
  Routing routing;
  double objective = std::numeric_limits<double>::infinity();
  double transport_cost = 0.0;
  double hub_fixed_cost = 0.0;
  double arc_fixed_cost = 0.0;
  std::vector<double> hub_arrivals;                 // size n, zero when closed
  std::vector<std::vector<double>> server_arrivals; // beta_kl * lambda_k
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = 0.0;    // (objective - lower_bound) / max(1, |objective|)
  long nodes = 0;      // subproblems evaluated
};

/// Routing subproblem for a fixed hub set.
struct Allocation {
  bool feasible = false;
  double transport = 0.0;    // sum C * W * x
  double arc_literal = 0.0;  // sum F_km * x on self-route variables
  Routing routing;
  std::vector<double> hub_arrivals;  // size n
  bool used_lp = false;  // false when the per-pair argmin was already feasible
};

/// Exact optimum of the continuous routing LP for the given (sorted) hub
/// set: per-pair normalization rows, one aggregate capacity row per hub
/// with a finite cap, objective C*W plus the literal arc charge on
/// self-route variables.  When every capacity holds at the unconstrained
/// per-pair argmin the LP is skipped; the argmin is already optimal.
Allocation allocation_lp(const NetworkInstance& inst, const CostTensor& ct,
                         const Matrix& w_sym, const Matrix& a_sym,
                         const std::vector<int>& hubs, const CapacityProfile& cap,
                         const ScenarioConfig& cfg);

/// Exhaustive search over all p-subsets, lexicographic order, ties broken
/// by the lexicographically smallest hub set.  Throws TooLarge when
/// C(n, p) exceeds cfg.enum_cap.  `arrivals` is the directional matrix
/// gamma * W; both it and the flow matrix are aggregated internally.
HubDesign enumerate_exact(const NetworkInstance& inst, const Matrix& arrivals,
                          const CapacityProfile& cap, const ScenarioConfig& cfg);

/// LP-relaxation branch and bound on the hub indicators: bounds from the
/// relaxation with 0 <= Y <= 1 and sum Y = p, delayed generation of the
/// per-pair linking rows, branching on the most fractional Y (ties to the
/// lowest index), depth-first order with the open side of each branch
/// revisited on backtrack.
HubDesign branch_and_bound(const NetworkInstance& inst, const Matrix& arrivals,
                           const CapacityProfile& cap, const ScenarioConfig& cfg);

/// Strategy dispatch: Enumerate / BranchAndBound as asked, Auto picks
/// enumeration when C(n, p) fits the cap and branch and bound otherwise.
HubDesign solve_design(const NetworkInstance& inst, const Matrix& arrivals,
                       const CapacityProfile& cap, const ScenarioConfig& cfg);

/// One verification line: constraint family, verdict, and the worst slack
/// observed (positive = satisfied by that margin, negative = violated).
struct VerifyCheck {
  std::string name;
  bool ok = true;
  double slack = 0.0;
};

struct VerifyReport {
  bool ok = true;
  std::vector<VerifyCheck> checks;
};

/// Independent re-check of an Optimal design: hub count, routing
/// normalization, hub support, per-server tail constraints re-evaluated
/// analytically from the routing (not via lambda_max), agreement between
/// the analytic verdict and the capacity-bound verdict, and objective
/// recomputation.
VerifyReport verify_design(const HubDesign& design, const NetworkInstance& inst,
                           const ServerBank& bank, const Matrix& arrivals,
                           const ScenarioConfig& cfg);

}  // namespace hubq
