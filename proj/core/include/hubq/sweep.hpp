// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "hubq/instances.hpp"
#include "hubq/solver.hpp"

namespace hubq {

/// Cross product alphas x ps x bs solved against one instance.  Rows come
/// out in grid order: alpha outermost, then p, then b.
struct SweepGrid {
  std::vector<double> alphas{0.2, 0.5, 0.8};
  std::vector<int> ps{4, 8, 12};
  std::vector<int> bs{5, 20};
  ScenarioConfig base;
};

struct SweepResult {
  std::vector<ReportRow> rows;     // grid order, one per cell
  std::vector<HubDesign> designs;  // aligned with rows; default when the cell errored
  double gamma = 1.0;              // rate scale actually used
  bool gamma_calibrated = false;
};

/// Rate scale that puts the busiest open server at the target fraction of
/// its own lambda_max when the uncapacitated problem is solved at
/// alpha = 0.2, p = min(4, n) with the base scenario (so the bound itself
/// uses the base b and theta).  Benchmark flow matrices carry arbitrary
/// units; calibration ties them to the service capacities without hand
/// tuning, close enough to the caps that the congestion constraint has
/// teeth.  Returns 1 when every server is unconstrained or flow is zero.
double calibrate_gamma(const Instance& inst, const ScenarioConfig& base,
                       double target_load = 0.9);

/// Runs every cell.  Exceptions inside a cell are captured in row.status
/// as error(...) and the sweep continues.  Cells run concurrently up to
/// base.jobs; rows are always in grid order.  gamma_explicit wins over
/// the instance's gamma, which wins over calibration; base.gamma itself
/// is ignored so that "unset" stays distinguishable.
SweepResult run_sweep(const Instance& inst, const SweepGrid& grid,
                      std::optional<double> gamma_explicit = std::nullopt);

/// node,x,y rows for external plotting.  Requires instance coordinates.
void write_nodes_csv(std::ostream& os, const Instance& inst);

/// alpha,p,b,src,dst,kind,flow: every leg of every routed path,
/// aggregated per undirected edge and per cell.  kind is hub for the
/// inter-hub leg and spoke for collection/distribution legs; zero-length
/// legs (origin is its own hub) are dropped.
void write_arcs_csv(std::ostream& os, const Instance& inst,
                    const SweepResult& result);

}  // namespace hubq
