// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hubq/matrix.hpp"
#include "hubq/model.hpp"
#include "hubq/queueing.hpp"

namespace hubq {

// One service channel at a candidate hub.
struct Server {
  double mu = 1.0;     // base service rate, entities per period
  double beta = 1.0;   // fraction of the hub's arrivals routed here
  int b = 5;           // maximum acceptable queue length
  double theta = 0.95; // maximum acceptable tail probability
};

// Per-candidate-hub server lists plus the shared service exponent.
class ServerBank {
 public:
  // Requires: one nonempty server list per hub, beta >= 0 summing to 1
  // per hub, mu > 0, b >= 0, theta in (0,1), c >= 0.
  ServerBank(std::vector<std::vector<Server>> servers, double c);

  int hubs() const { return static_cast<int>(servers_.size()); }
  const std::vector<Server>& at(int k) const { return servers_[k]; }
  double c() const { return c_; }

 private:
  std::vector<std::vector<Server>> servers_;
  double c_;
};

enum class Strategy { Auto, Enumerate, BranchAndBound };
enum class ArcCostMode { Literal, Binary };

// Fully resolved scenario: every solver-facing knob with a concrete value.
// The CLI merges flags > config file > instance scalars > these defaults.
struct ScenarioConfig {
  double alpha = 0.2;
  int p = 4;
  int b = 5;         // applied uniformly as b_kl
  double theta = 0.95;
  double c = 0.2;
  double gamma = 1.0;      // peak-hour scaling: a_ij = gamma * W_ij
  double hub_cost = 0.0;   // uniform F_k when the instance has none
  double arc_cost = 0.0;   // uniform F_km when the instance has none
  double epsilon = kDefaultEpsilon;
  double feas_tol = 1e-7;  // absolute, capacity rows
  double lp_tol = 1e-9;    // relative, LP optimality
  long enum_cap = 200000;  // largest C(n,p) enumerate_exact accepts
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  int jobs = 1;
  Strategy strategy = Strategy::Auto;
  bool eq19_literal = false;  // double-count x_ijkk in hub arrivals
  ArcCostMode arc_cost_mode = ArcCostMode::Literal;
};

// Throws ValidationError when any field is out of range.
void validate(const ScenarioConfig& cfg);

// Raw parse result of an instance file.  Matrices are kept exactly as
// written; scalars the file omits stay unset so callers can layer
// config-file and flag overrides on top.
struct Instance {
  int n = 0;
  Matrix dist;                // n x n
  Matrix flow;                // n x n, directional (pre-symmetrization)
  std::vector<double> fixed_hub;          // empty when absent
  Matrix fixed_arc;                       // 0 x 0 when absent
  std::vector<std::vector<Server>> servers;  // empty when absent
  Matrix coords;              // n x 2 (x, y) when present, else 0 x 0
  std::optional<double> alpha;
  std::optional<int> p;
  std::optional<double> c;
  std::optional<double> gamma;

  // Value shared by every server in the file, or nullopt when servers
  // are absent or heterogeneous.  Used for scalar-default resolution.
  std::optional<int> uniform_b() const;
  std::optional<double> uniform_theta() const;
};

// Structured-text instance format; grammar in docs/instance-format.md.
Instance parse_instance(std::istream& in, const std::string& name = "<stream>");
Instance load_instance(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);

// a[i][j] = gamma * W[i][j], elementwise on the directional flow.
Matrix derive_arrivals(const Matrix& flow, double gamma);
Matrix derive_arrivals(const Instance& inst, const ScenarioConfig& cfg);

// Uniform synthetic fixed costs for instances that carry none.
// F_hub[k] = hub_cost for all k; F_arc[k][m] = arc_cost off-diagonal.
std::pair<std::vector<double>, Matrix> synth_costs(const ScenarioConfig& cfg, int n);

// Assemble the validated model inputs, preferring file data over
// synthetic defaults for fixed costs and server parameters.  The
// scenario's b, theta, and c are applied to every server.
NetworkInstance build_network(const Instance& inst, const ScenarioConfig& cfg);
ServerBank build_bank(const Instance& inst, const ScenarioConfig& cfg);

// Optional override layer parsed from --config files; unset fields
// leave the underlying value alone.
struct ConfigOverlay {
  std::optional<double> alpha, theta, c, gamma, hub_cost, arc_cost;
  std::optional<double> epsilon, feas_tol, lp_tol, time_limit;
  std::optional<int> p, b, jobs;
  std::optional<long> enum_cap;
  std::optional<Strategy> strategy;
  std::optional<bool> eq19_literal;
  std::optional<ArcCostMode> arc_cost_mode;
};

ConfigOverlay parse_config(std::istream& in, const std::string& name = "<stream>");
ConfigOverlay load_config(const std::string& path);
void apply(const ConfigOverlay& overlay, ScenarioConfig& cfg);

// One sweep/solve outcome in the report CSV schema.
struct ReportRow {
  double alpha = 0.0;
  int p = 0;
  int b = 0;
  double theta = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> hubs;
  double transport_cost = 0.0;
  double hub_fixed_cost = 0.0;
  double arc_fixed_cost = 0.0;
  std::string status;  // optimal | infeasible | time_limit(gap=...) | error(...)
  double seconds = 0.0;
};

inline constexpr const char* kReportHeader =
    "alpha,p,b,theta,objective,hubs,transport_cost,hub_fixed_cost,"
    "arc_fixed_cost,status,seconds";

struct Report {
  std::vector<std::string> comments;  // leading '#' lines, config echo
  std::vector<ReportRow> rows;
};

void write_report(std::ostream& out, const std::vector<std::string>& comments,
                  const std::vector<ReportRow>& rows);
Report parse_report(std::istream& in);

// Shortest round-trip decimal rendering of a double (to_chars).
std::string format_real(double v);

}  // namespace hubq
