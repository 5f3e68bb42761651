// SPDX-License-Identifier: Apache-2.0
#include "hubq/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hubq/errors.hpp"

namespace hubq {

namespace {

constexpr double kBetaSumTol = 1e-9;

[[noreturn]] void invariant_fail(const std::string& msg) { throw ValidationError(msg); }

}  // namespace

ServerBank::ServerBank(std::vector<std::vector<Server>> servers, double c)
    : servers_(std::move(servers)), c_(c) {
  if (c_ < 0.0) invariant_fail("service exponent c must be >= 0");
  if (servers_.empty()) invariant_fail("server bank has no hubs");
  for (size_t k = 0; k < servers_.size(); ++k) {
    const auto& list = servers_[k];
    if (list.empty())
      invariant_fail("hub " + std::to_string(k) + " has no servers");
    double beta_sum = 0.0;
    for (size_t l = 0; l < list.size(); ++l) {
      const Server& s = list[l];
      const std::string at = "server (" + std::to_string(k) + "," + std::to_string(l) + ")";
      if (!(s.mu > 0.0)) invariant_fail(at + ": mu must be > 0");
      if (s.beta < 0.0) invariant_fail(at + ": beta must be >= 0");
      if (s.b < 0) invariant_fail(at + ": b must be >= 0");
      if (!(s.theta > 0.0 && s.theta < 1.0))
        invariant_fail(at + ": theta must be in (0, 1)");
      beta_sum += s.beta;
    }
    if (std::abs(beta_sum - 1.0) > kBetaSumTol)
      invariant_fail("split fractions at hub " + std::to_string(k) + " sum to " +
                     format_real(beta_sum) + ", expected 1");
  }
}

void validate(const ScenarioConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    invariant_fail("alpha must be in [0, 1]");
  if (cfg.p < 1) invariant_fail("p must be >= 1");
  if (cfg.b < 0) invariant_fail("b must be >= 0");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
    invariant_fail("theta must be in (0, 1)");
  if (cfg.c < 0.0) invariant_fail("c must be >= 0");
  if (!(cfg.gamma > 0.0)) invariant_fail("gamma must be > 0");
  if (cfg.hub_cost < 0.0) invariant_fail("hub_cost must be >= 0");
  if (cfg.arc_cost < 0.0) invariant_fail("arc_cost must be >= 0");
  if (!(cfg.epsilon > 0.0)) invariant_fail("epsilon must be > 0");
  if (!(cfg.feas_tol > 0.0)) invariant_fail("feas_tol must be > 0");
  if (!(cfg.lp_tol > 0.0)) invariant_fail("lp_tol must be > 0");
  if (cfg.enum_cap < 1) invariant_fail("enum_cap must be >= 1");
  if (!(cfg.time_limit > 0.0)) invariant_fail("time_limit must be > 0");
  if (cfg.jobs < 1) invariant_fail("jobs must be >= 1");
}

std::optional<int> Instance::uniform_b() const {
  std::optional<int> v;
  for (const auto& list : servers)
    for (const Server& s : list) {
      if (!v) v = s.b;
      else if (*v != s.b) return std::nullopt;
    }
  return v;
}

std::optional<double> Instance::uniform_theta() const {
  std::optional<double> v;
  for (const auto& list : servers)
    for (const Server& s : list) {
      if (!v) v = s.theta;
      else if (*v != s.theta) return std::nullopt;
    }
  return v;
}

namespace {

struct Tok {
  std::string text;
  int line;
};

// Whitespace-separated tokens; '#' comments run to end of line.
class TokenStream {
 public:
  TokenStream(std::istream& in, std::string name) : name_(std::move(name)) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) toks_.push_back({t, lineno});
    }
  }

  bool eof() const { return pos_ >= toks_.size(); }
  const Tok& peek() const { return toks_[pos_]; }
  Tok next() { return toks_[pos_++]; }
  int last_line() const { return toks_.empty() ? 0 : toks_.back().line; }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ParseError(name_ + ":" + std::to_string(line) + ": " + msg);
  }

  double want_real(const char* what) {
    if (eof()) fail(last_line(), std::string("expected ") + what + ", got end of file");
    const Tok t = next();
    double v = 0.0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
      fail(t.line, std::string("expected ") + what + ", got '" + t.text + "'");
    return v;
  }

  int want_int(const char* what) {
    if (eof()) fail(last_line(), std::string("expected ") + what + ", got end of file");
    const Tok t = next();
    int v = 0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
      fail(t.line, std::string("expected ") + what + ", got '" + t.text + "'");
    return v;
  }

  bool peek_is_number() const {
    if (eof()) return false;
    double v = 0.0;
    const std::string& s = toks_[pos_].text;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size();
  }

 private:
  std::string name_;
  std::vector<Tok> toks_;
  size_t pos_ = 0;
};

Matrix read_matrix(TokenStream& ts, int rows, int cols, const char* what) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = ts.want_real(what);
  return m;
}

std::vector<Server> read_server_rows(TokenStream& ts) {
  std::vector<Server> list;
  while (ts.peek_is_number()) {
    Server s;
    s.mu = ts.want_real("server mu");
    s.beta = ts.want_real("server beta");
    s.b = ts.want_int("server b");
    s.theta = ts.want_real("server theta");
    list.push_back(s);
  }
  return list;
}

void check_network_invariants(const Instance& inst, TokenStream& ts) {
  const int n = inst.n;
  if (inst.dist.rows() != n) ts.fail(ts.last_line(), "missing required section 'distance'");
  if (inst.flow.rows() != n) ts.fail(ts.last_line(), "missing required section 'flow'");
  for (int i = 0; i < n; ++i) {
    if (inst.dist(i, i) != 0.0)
      invariant_fail("distance diagonal must be zero (node " + std::to_string(i) + ")");
    for (int j = 0; j < n; ++j) {
      if (inst.dist(i, j) < 0.0) invariant_fail("distances must be >= 0");
      if (inst.dist(i, j) != inst.dist(j, i))
        invariant_fail("distance matrix must be symmetric (" + std::to_string(i) + "," +
                       std::to_string(j) + ")");
      if (inst.flow(i, j) < 0.0) invariant_fail("flows must be >= 0");
    }
  }
  if (!inst.fixed_hub.empty())
    for (double f : inst.fixed_hub)
      if (f < 0.0) invariant_fail("fixed hub costs must be >= 0");
  if (inst.fixed_arc.rows() > 0)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (inst.fixed_arc(i, j) < 0.0) invariant_fail("fixed arc costs must be >= 0");
        if (inst.fixed_arc(i, j) != inst.fixed_arc(j, i))
          invariant_fail("fixed arc cost matrix must be symmetric");
      }
  if (inst.alpha && !(*inst.alpha >= 0.0 && *inst.alpha <= 1.0))
    invariant_fail("alpha must be in [0, 1]");
  if (inst.p && (*inst.p < 1 || *inst.p > n))
    invariant_fail("p must be in [1, n]");
  if (inst.c && *inst.c < 0.0) invariant_fail("c must be >= 0");
  if (inst.gamma && !(*inst.gamma > 0.0)) invariant_fail("gamma must be > 0");
  if (!inst.servers.empty()) {
    // Constructing the bank runs the full per-server validation.
    ServerBank(inst.servers, inst.c.value_or(0.0));
  }
}

}  // namespace

Instance parse_instance(std::istream& in, const std::string& name) {
  TokenStream ts(in, name);
  if (ts.eof()) ts.fail(0, "empty instance file");
  {
    const Tok t = ts.next();
    if (t.text != "n") ts.fail(t.line, "instance must start with 'n <count>'");
  }
  Instance inst;
  inst.n = ts.want_int("node count");
  if (inst.n < 1) invariant_fail("n must be >= 1");

  while (!ts.eof()) {
    const Tok key = ts.next();
    const std::string& k = key.text;
    if (k == "alpha") inst.alpha = ts.want_real("alpha");
    else if (k == "p") inst.p = ts.want_int("p");
    else if (k == "c") inst.c = ts.want_real("c");
    else if (k == "gamma") inst.gamma = ts.want_real("gamma");
    else if (k == "distance") inst.dist = read_matrix(ts, inst.n, inst.n, "distance entry");
    else if (k == "flow") inst.flow = read_matrix(ts, inst.n, inst.n, "flow entry");
    else if (k == "fixed_hub") {
      inst.fixed_hub.resize(inst.n);
      for (int i = 0; i < inst.n; ++i) inst.fixed_hub[i] = ts.want_real("fixed hub cost");
    } else if (k == "fixed_arc") {
      inst.fixed_arc = read_matrix(ts, inst.n, inst.n, "fixed arc cost");
    } else if (k == "coords") {
      inst.coords = read_matrix(ts, inst.n, 2, "coordinate");
    } else if (k == "servers") {
      inst.servers.assign(inst.n, {});
      for (int h = 0; h < inst.n; ++h) {
        if (ts.eof()) ts.fail(ts.last_line(), "expected 'hub " + std::to_string(h) + "'");
        const Tok hk = ts.next();
        if (hk.text != "hub") ts.fail(hk.line, "expected 'hub', got '" + hk.text + "'");
        const int idx = ts.want_int("hub index");
        if (idx != h)
          ts.fail(hk.line, "hub blocks must appear in order 0.." + std::to_string(inst.n - 1));
        inst.servers[h] = read_server_rows(ts);
        if (inst.servers[h].empty()) ts.fail(hk.line, "hub " + std::to_string(h) + " lists no servers");
      }
    } else if (k == "servers_uniform") {
      const std::vector<Server> rows = read_server_rows(ts);
      if (rows.empty()) ts.fail(key.line, "servers_uniform lists no servers");
      inst.servers.assign(inst.n, rows);
    } else {
      ts.fail(key.line, "unknown section '" + k + "'");
    }
  }
  check_network_invariants(inst, ts);
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return parse_instance(in, path);
}

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

namespace {

void write_matrix(std::ostream& out, const Matrix& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_real(m(r, c));
    }
    out << '\n';
  }
}

void write_server_row(std::ostream& out, const Server& s) {
  out << format_real(s.mu) << ' ' << format_real(s.beta) << ' ' << s.b << ' '
      << format_real(s.theta) << '\n';
}

}  // namespace

void write_instance(std::ostream& out, const Instance& inst) {
  out << "n " << inst.n << '\n';
  if (inst.alpha) out << "alpha " << format_real(*inst.alpha) << '\n';
  if (inst.p) out << "p " << *inst.p << '\n';
  if (inst.c) out << "c " << format_real(*inst.c) << '\n';
  if (inst.gamma) out << "gamma " << format_real(*inst.gamma) << '\n';
  out << "distance\n";
  write_matrix(out, inst.dist);
  out << "flow\n";
  write_matrix(out, inst.flow);
  if (!inst.fixed_hub.empty()) {
    out << "fixed_hub\n";
    for (size_t i = 0; i < inst.fixed_hub.size(); ++i) {
      if (i) out << ' ';
      out << format_real(inst.fixed_hub[i]);
    }
    out << '\n';
  }
  if (inst.fixed_arc.rows() > 0) {
    out << "fixed_arc\n";
    write_matrix(out, inst.fixed_arc);
  }
  if (inst.coords.rows() > 0) {
    out << "coords\n";
    write_matrix(out, inst.coords);
  }
  if (!inst.servers.empty()) {
    const bool uniform =
        std::all_of(inst.servers.begin(), inst.servers.end(), [&](const auto& list) {
          if (list.size() != inst.servers[0].size()) return false;
          for (size_t l = 0; l < list.size(); ++l) {
            const Server &a = list[l], &b = inst.servers[0][l];
            if (a.mu != b.mu || a.beta != b.beta || a.b != b.b || a.theta != b.theta)
              return false;
          }
          return true;
        });
    if (uniform) {
      out << "servers_uniform\n";
      for (const Server& s : inst.servers[0]) write_server_row(out, s);
    } else {
      out << "servers\n";
      for (int h = 0; h < inst.n; ++h) {
        out << "hub " << h << '\n';
        for (const Server& s : inst.servers[h]) write_server_row(out, s);
      }
    }
  }
}

Matrix derive_arrivals(const Matrix& flow, double gamma) {
  if (!(gamma > 0.0)) invariant_fail("gamma must be > 0");
  Matrix a = flow;
  for (double& v : a.data()) v *= gamma;
  return a;
}

Matrix derive_arrivals(const Instance& inst, const ScenarioConfig& cfg) {
  return derive_arrivals(inst.flow, cfg.gamma);
}

std::pair<std::vector<double>, Matrix> synth_costs(const ScenarioConfig& cfg, int n) {
  if (cfg.hub_cost < 0.0 || cfg.arc_cost < 0.0)
    invariant_fail("fixed cost parameters must be >= 0");
  std::vector<double> hub(n, cfg.hub_cost);
  Matrix arc(n, n, cfg.arc_cost);
  for (int k = 0; k < n; ++k) arc(k, k) = 0.0;
  return {std::move(hub), std::move(arc)};
}

NetworkInstance build_network(const Instance& inst, const ScenarioConfig& cfg) {
  auto [hub, arc] = synth_costs(cfg, inst.n);
  if (!inst.fixed_hub.empty()) {
    if (static_cast<int>(inst.fixed_hub.size()) != inst.n)
      invariant_fail("fixed_hub must list n values");
    hub = inst.fixed_hub;
  }
  if (inst.fixed_arc.rows() > 0) {
    if (inst.fixed_arc.rows() != inst.n || inst.fixed_arc.cols() != inst.n)
      invariant_fail("fixed_arc must be n x n");
    arc = inst.fixed_arc;
  }
  return NetworkInstance(inst.dist, inst.flow, std::move(hub), std::move(arc),
                         cfg.alpha, cfg.p);
}

ServerBank build_bank(const Instance& inst, const ScenarioConfig& cfg) {
  std::vector<std::vector<Server>> servers = inst.servers;
  if (servers.empty()) servers.assign(inst.n, {Server{1.0, 1.0, cfg.b, cfg.theta}});
  // Scenario b and theta apply uniformly; mu and beta come from the file.
  for (auto& list : servers)
    for (Server& s : list) {
      s.b = cfg.b;
      s.theta = cfg.theta;
    }
  return ServerBank(std::move(servers), cfg.c);
}

namespace {

Strategy parse_strategy(TokenStream& ts) {
  if (ts.eof()) ts.fail(ts.last_line(), "expected strategy value");
  const Tok t = ts.next();
  if (t.text == "auto") return Strategy::Auto;
  if (t.text == "enum") return Strategy::Enumerate;
  if (t.text == "bnb") return Strategy::BranchAndBound;
  ts.fail(t.line, "strategy must be auto, enum or bnb");
}

ArcCostMode parse_arc_mode(TokenStream& ts) {
  if (ts.eof()) ts.fail(ts.last_line(), "expected arc_cost_mode value");
  const Tok t = ts.next();
  if (t.text == "literal") return ArcCostMode::Literal;
  if (t.text == "binary") return ArcCostMode::Binary;
  ts.fail(t.line, "arc_cost_mode must be literal or binary");
}

bool parse_eq19(TokenStream& ts) {
  if (ts.eof()) ts.fail(ts.last_line(), "expected eq19 value");
  const Tok t = ts.next();
  if (t.text == "single") return false;
  if (t.text == "literal") return true;
  ts.fail(t.line, "eq19 must be single or literal");
}

}  // namespace

ConfigOverlay parse_config(std::istream& in, const std::string& name) {
  TokenStream ts(in, name);
  ConfigOverlay o;
  while (!ts.eof()) {
    const Tok key = ts.next();
    const std::string& k = key.text;
    if (k == "alpha") o.alpha = ts.want_real("alpha");
    else if (k == "p") o.p = ts.want_int("p");
    else if (k == "b") o.b = ts.want_int("b");
    else if (k == "theta") o.theta = ts.want_real("theta");
    else if (k == "c") o.c = ts.want_real("c");
    else if (k == "gamma") o.gamma = ts.want_real("gamma");
    else if (k == "hub_cost") o.hub_cost = ts.want_real("hub_cost");
    else if (k == "arc_cost") o.arc_cost = ts.want_real("arc_cost");
    else if (k == "epsilon") o.epsilon = ts.want_real("epsilon");
    else if (k == "feas_tol") o.feas_tol = ts.want_real("feas_tol");
    else if (k == "lp_tol") o.lp_tol = ts.want_real("lp_tol");
    else if (k == "enum_cap") o.enum_cap = static_cast<long>(ts.want_real("enum_cap"));
    else if (k == "time_limit") o.time_limit = ts.want_real("time_limit");
    else if (k == "jobs") o.jobs = ts.want_int("jobs");
    else if (k == "strategy") o.strategy = parse_strategy(ts);
    else if (k == "eq19") o.eq19_literal = parse_eq19(ts);
    else if (k == "arc_cost_mode") o.arc_cost_mode = parse_arc_mode(ts);
    else ts.fail(key.line, "unknown config key '" + k + "'");
  }
  return o;
}

ConfigOverlay load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return parse_config(in, path);
}

void apply(const ConfigOverlay& o, ScenarioConfig& cfg) {
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.p) cfg.p = *o.p;
  if (o.b) cfg.b = *o.b;
  if (o.theta) cfg.theta = *o.theta;
  if (o.c) cfg.c = *o.c;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.hub_cost) cfg.hub_cost = *o.hub_cost;
  if (o.arc_cost) cfg.arc_cost = *o.arc_cost;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.feas_tol) cfg.feas_tol = *o.feas_tol;
  if (o.lp_tol) cfg.lp_tol = *o.lp_tol;
  if (o.enum_cap) cfg.enum_cap = *o.enum_cap;
  if (o.time_limit) cfg.time_limit = *o.time_limit;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.strategy) cfg.strategy = *o.strategy;
  if (o.eq19_literal) cfg.eq19_literal = *o.eq19_literal;
  if (o.arc_cost_mode) cfg.arc_cost_mode = *o.arc_cost_mode;
}

namespace {

std::string join_hubs(const std::vector<int>& hubs) {
  std::string s;
  for (size_t i = 0; i < hubs.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(hubs[i]);
  }
  return s;
}

std::string sanitize_status(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

}  // namespace

void write_report(std::ostream& out, const std::vector<std::string>& comments,
                  const std::vector<ReportRow>& rows) {
  for (const std::string& c : comments) out << "# " << c << '\n';
  out << kReportHeader << '\n';
  for (const ReportRow& r : rows) {
    out << format_real(r.alpha) << ',' << r.p << ',' << r.b << ','
        << format_real(r.theta) << ',' << format_real(r.objective) << ','
        << join_hubs(r.hubs) << ',' << format_real(r.transport_cost) << ','
        << format_real(r.hub_fixed_cost) << ',' << format_real(r.arc_fixed_cost)
        << ',' << sanitize_status(r.status) << ',' << format_seconds(r.seconds)
        << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double field_real(const std::string& s, int lineno, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("report line " + std::to_string(lineno) + ": bad " + what +
                     " '" + s + "'");
  return v;
}

int field_int(const std::string& s, int lineno, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("report line " + std::to_string(lineno) + ": bad " + what +
                     " '" + s + "'");
  return v;
}

}  // namespace

Report parse_report(std::istream& in) {
  Report rep;
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string c = line.substr(1);
      if (!c.empty() && c[0] == ' ') c.erase(0, 1);
      rep.comments.push_back(c);
      continue;
    }
    if (!saw_header) {
      if (line != kReportHeader)
        throw ParseError("report line " + std::to_string(lineno) +
                         ": unexpected header '" + line + "'");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 11)
      throw ParseError("report line " + std::to_string(lineno) + ": expected 11 fields, got " +
                       std::to_string(f.size()));
    ReportRow r;
    r.alpha = field_real(f[0], lineno, "alpha");
    r.p = field_int(f[1], lineno, "p");
    r.b = field_int(f[2], lineno, "b");
    r.theta = field_real(f[3], lineno, "theta");
    r.objective = field_real(f[4], lineno, "objective");
    if (!f[5].empty())
      for (const std::string& h : split(f[5], ';'))
        r.hubs.push_back(field_int(h, lineno, "hub index"));
    r.transport_cost = field_real(f[6], lineno, "transport_cost");
    r.hub_fixed_cost = field_real(f[7], lineno, "hub_fixed_cost");
    r.arc_fixed_cost = field_real(f[8], lineno, "arc_fixed_cost");
    r.status = f[9];
    r.seconds = field_real(f[10], lineno, "seconds");
    rep.rows.push_back(std::move(r));
  }
  if (!saw_header) throw ParseError("report: missing header row");
  return rep;
}

}  // namespace hubq
