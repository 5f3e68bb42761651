// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hubq/errors.hpp"
#include "hubq/lp.hpp"
#include "hubq/solver.hpp"

namespace hubq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

struct Node {
  uint64_t fix0 = 0;  // hubs forced closed
  uint64_t fix1 = 0;  // hubs forced open
  double bound = -kInf;  // parent LP value: valid lower bound for the subtree
  long id = 0;
};

// Branch and bound over the hub indicators.  One LP instance lives for the
// whole tree: node switches are bound changes, and the per-pair linking
// rows are generated lazily into a shared, monotone pool (each is valid
// for every node, so rows never need removing).
class Tree {
 public:
  Tree(const NetworkInstance& inst, const Matrix& arrivals,
       const CapacityProfile& cap, const ScenarioConfig& cfg)
      : inst_(inst),
        cap_(cap),
        cfg_(cfg),
        n_(inst.n()),
        p_(inst.p()),
        w_sym_(symmetrize_flows(inst.flow_matrix())),
        a_sym_(symmetrize_flows(arrivals)),
        ct_(inst),
        literal_arc_(cfg.arc_cost_mode == ArcCostMode::Literal),
        lit19_(cfg.eq19_literal) {
    if (n_ > 64)
      throw ValidationError("branch and bound supports at most 64 nodes");
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) pair_ij_.emplace_back(i, j);
    np_ = static_cast<int>(pair_ij_.size());
    build_lp();
  }

  HubDesign run() {
    const auto t0 = Clock::now();
    const auto deadline =
        cfg_.time_limit < kInf
            ? std::optional<Clock::time_point>(
                  t0 + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(cfg_.time_limit)))
            : std::nullopt;

    std::vector<Node> open;
    open.push_back(Node{});
    long next_id = 1;
    long nodes_solved = 0;
    bool timed_out = false;

    while (!open.empty()) {
      if (deadline && Clock::now() >= *deadline) {
        timed_out = true;
        break;
      }
      // Depth-first: the last pushed child differs from the previous node
      // in a single hub fixing, so the warm dual restart stays local.
      Node node = open.back();
      open.pop_back();

      if (prunable(node.bound, node)) continue;

      const int open_cnt = popcount(node.fix1);
      const int closed_cnt = popcount(node.fix0);
      if (open_cnt > p_ || n_ - closed_cnt < p_) continue;
      if (open_cnt == p_ || n_ - closed_cnt == p_) {
        // The hub set is forced, so the node is a leaf: evaluate the set
        // exactly instead of solving the relaxation.
        std::vector<int> H;
        for (int k = 0; k < n_; ++k) {
          const bool open = open_cnt == p_ ? ((node.fix1 >> k) & 1) != 0
                                           : ((node.fix0 >> k) & 1) == 0;
          if (open) H.push_back(k);
        }
        offer_incumbent(H);
        ++nodes_solved;
        continue;
      }

      const int jump = apply_node(node);
      // A long backtrack moves the LP to a distant subtree; restarting from
      // the argmin basis is cheaper than unwinding the inherited one.
      if (jump > kReseedJump) reseed_basis();
      bool clean = false;
      lp::Solution sol;
      // The root gets a thorough separation pass; descendants inherit the
      // pool and only need a few rounds to stay useful.
      const NodeResult res =
          solve_node(sol, clean, deadline, nodes_solved == 0 ? 40 : 5);
      if (res == NodeResult::OutOfTime) {
        open.push_back(node);  // bound still valid; keep it for the gap
        timed_out = true;
        break;
      }
      if (res == NodeResult::Infeasible) continue;  // infeasible subtree
      ++nodes_solved;
      if (nodes_solved == 1) {
        // Round the root relaxation: the p largest indicators seed the
        // incumbent so pruning starts before the first dive bottoms out.
        std::vector<int> order(n_);
        for (int k = 0; k < n_; ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return sol.x[ycol(a)] > sol.x[ycol(b)];
        });
        std::vector<int> H(order.begin(), order.begin() + p_);
        std::sort(H.begin(), H.end());
        offer_incumbent(H);
      }
      const double node_val = sol.objective;
      if (prunable(node_val, node)) continue;

      // Branching variable: most fractional free hub.
      int kb = -1;
      double best_frac = 1e-6;
      for (int k = 0; k < n_; ++k) {
        if (is_fixed(node, k)) continue;
        const double y = sol.x[k];
        const double frac = std::min(y, 1.0 - y);
        if (frac > best_frac) {
          best_frac = frac;
          kb = k;
        }
      }

      if (kb < 0) {
        // Integral hub indicators.  With a clean row pool the LP optimum
        // is feasible for the full model, so the subtree is fathomed by
        // evaluating this hub set exactly.  With a dirty pool we can only
        // trust the set if nothing is left free.
        std::vector<int> H;
        for (int k = 0; k < n_; ++k)
          if (sol.x[k] > 0.5) H.push_back(k);
        if (clean || popcount(node.fix0) + popcount(node.fix1) == n_) {
          offer_incumbent(H);
          continue;
        }
        // Dirty pool with free hubs: split on the lowest free index.
        for (int k = 0; k < n_; ++k)
          if (!is_fixed(node, k)) {
            kb = k;
            break;
          }
      }

      Node c0 = node, c1 = node;
      c0.fix0 |= 1ull << kb;
      c1.fix1 |= 1ull << kb;
      c0.bound = c1.bound = node_val;
      c0.id = next_id++;
      c1.id = next_id++;
      open.push_back(c0);
      open.push_back(c1);  // popped first: dive on the "open the hub" child
    }

    HubDesign d;
    d.nodes = nodes_solved;
    double lb = open.empty() ? kInf : open.front().bound;
    for (const Node& nd : open) lb = std::min(lb, nd.bound);
    if (incumbent_) {
      d = make_final(incumbent_->hubs);
      d.nodes = nodes_solved;
      if (timed_out) {
        d.status = SolveStatus::TimeLimit;
        d.lower_bound = std::min(lb, d.objective);
        d.gap = (d.objective - d.lower_bound) / std::max(1.0, std::abs(d.objective));
      } else {
        d.status = SolveStatus::Optimal;
        d.lower_bound = d.objective;
        d.gap = 0.0;
      }
      return d;
    }
    d.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
    d.lower_bound = timed_out ? lb : kInf;
    d.gap = kInf;
    return d;
  }

 private:
  static int popcount(uint64_t v) { return __builtin_popcountll(v); }

  int ycol(int k) const { return k; }
  int xcol(int pr, int k, int m) const {
    return x_base_ + (pr * n_ + k) * n_ + m;
  }

  void build_lp() {
    lp::Problem prob;
    for (int k = 0; k < n_; ++k) prob.add_variable(inst_.hub_cost(k), 0.0, 1.0);
    if (!literal_arc_) {
      z_base_ = prob.num_vars();
      z_of_.assign(static_cast<size_t>(n_) * n_, -1);
      for (int k = 0; k < n_; ++k)
        for (int m = k + 1; m < n_; ++m)
          if (inst_.arc_cost(k, m) > 0.0) {
            const int z = prob.add_variable(inst_.arc_cost(k, m), 0.0, 1.0);
            z_of_[static_cast<size_t>(k) * n_ + m] = z;
          }
    }
    x_base_ = prob.num_vars();
    argmin_col_.assign(np_, -1);
    std::vector<int>& argmin_col = argmin_col_;
    for (int pr = 0; pr < np_; ++pr) {
      const auto [i, j] = pair_ij_[pr];
      const double w = w_sym_(i, j);
      double best = kInf;
      for (int k = 0; k < n_; ++k)
        for (int m = 0; m < n_; ++m) {
          double cost = w * ct_.at(pr, k, m);
          if (literal_arc_ && k == i && m == j) cost += inst_.arc_cost(i, j);
          const int col = prob.add_variable(cost, 0.0, 1.0);
          if (cost < best) {
            best = cost;
            argmin_col[pr] = col;
          }
        }
    }

    for (int pr = 0; pr < np_; ++pr) {
      const int row = prob.add_row(lp::RowSense::Equal, 1.0);
      for (int k = 0; k < n_; ++k)
        for (int m = 0; m < n_; ++m) prob.add_term(row, xcol(pr, k, m), 1.0);
    }
    {
      const int row = prob.add_row(lp::RowSense::Equal, static_cast<double>(p_));
      for (int k = 0; k < n_; ++k) prob.add_term(row, ycol(k), 1.0);
    }
    // Capacity rows in the lifted form lambda_k <= cap_k * Y_k, which the
    // linking constraints make equivalent on integral points and which
    // couples Y to the routing even before any linking row exists.
    for (int k = 0; k < n_; ++k) {
      if (cap_.hub_cap[k] >= kInf) continue;
      const int row = prob.add_row(lp::RowSense::LessEqual, 0.0);
      prob.add_term(row, ycol(k), -cap_.hub_cap[k]);
      for (int pr = 0; pr < np_; ++pr) {
        const auto [i, j] = pair_ij_[pr];
        const double a = a_sym_(i, j);
        if (a <= 0.0) continue;
        for (int m = 0; m < n_; ++m) {
          if (m == k) continue;
          prob.add_term(row, xcol(pr, k, m), a);
          prob.add_term(row, xcol(pr, m, k), a);
        }
        prob.add_term(row, xcol(pr, k, k), a * (lit19_ ? 2.0 : 1.0));
      }
    }
    // Aggregated linking: the sum of the per-pair rows for hub k.  Much
    // weaker than the individual rows but present from the start, which
    // keeps the root bound coupled to Y even when no capacity row exists.
    for (int k = 0; k < n_; ++k) {
      const int row = prob.add_row(lp::RowSense::LessEqual, 0.0);
      prob.add_term(row, ycol(k), -static_cast<double>(np_));
      for (int pr = 0; pr < np_; ++pr)
        for (int m = 0; m < n_; ++m) {
          prob.add_term(row, xcol(pr, k, m), 1.0);
          if (m != k) prob.add_term(row, xcol(pr, m, k), 1.0);
        }
    }
    if (!literal_arc_) {
      for (int k = 0; k < n_; ++k)
        for (int m = k + 1; m < n_; ++m) {
          const int z = z_of_[static_cast<size_t>(k) * n_ + m];
          if (z < 0) continue;
          const int row = prob.add_row(lp::RowSense::LessEqual, 1.0);
          prob.add_term(row, ycol(k), 1.0);
          prob.add_term(row, ycol(m), 1.0);
          prob.add_term(row, z, -1.0);
        }
    }

    lp::Options lopt;
    lopt.dual_tol = cfg_.lp_tol;
    solver_.emplace(prob, lopt);
    // Dual-feasible start: each pair row carries its cheapest route, every
    // coupling row its slack.  The first solve then repairs the coupling
    // rows instead of grinding through a degenerate cold start.
    std::vector<int> hint(prob.num_rows());
    for (int pr = 0; pr < np_; ++pr) hint[pr] = argmin_col[pr];
    for (int q = np_; q < prob.num_rows(); ++q) hint[q] = prob.num_vars() + q;
    solver_->set_basis(hint);
    link_added_.assign(static_cast<size_t>(np_) * n_, 0);
    applied_.assign(n_, 0);
    closed_.assign(n_, 0);
  }

  static bool is_fixed(const Node& nd, int k) {
    return ((nd.fix0 | nd.fix1) >> k) & 1u;
  }

  // Applies the node's fixings to the solver bounds and returns how many
  // hubs changed state, which measures how far the tree jumped since the
  // previous node.
  int apply_node(const Node& nd) {
    std::vector<int> want(n_);
    std::vector<int> changed_closed;
    int changed = 0;
    for (int k = 0; k < n_; ++k) {
      want[k] = (nd.fix1 >> k) & 1 ? 1 : ((nd.fix0 >> k) & 1 ? 2 : 0);
      if (want[k] == applied_[k]) continue;
      ++changed;
      solver_->set_bounds(ycol(k), want[k] == 1 ? 1.0 : 0.0,
                          want[k] == 2 ? 0.0 : 1.0);
      const bool now_closed = want[k] == 2;
      if (closed_[k] != static_cast<char>(now_closed)) {
        closed_[k] = static_cast<char>(now_closed);
        changed_closed.push_back(k);
      }
      applied_[k] = want[k];
    }
    // Routing columns that touch a closed hub are pinned to zero; this is
    // what makes linking rows unnecessary for fixed hubs.
    for (int k : changed_closed)
      for (int pr = 0; pr < np_; ++pr)
        for (int m = 0; m < n_; ++m) {
          const double up_km = (closed_[k] || closed_[m]) ? 0.0 : 1.0;
          solver_->set_bounds(xcol(pr, k, m), 0.0, up_km);
          if (m != k) {
            const double up_mk = (closed_[m] || closed_[k]) ? 0.0 : 1.0;
            solver_->set_bounds(xcol(pr, m, k), 0.0, up_mk);
          }
        }
    return changed;
  }

  // Re-arms the argmin starting basis (pair rows on their cheapest route,
  // coupling rows on their slack).  Worth it after a long backtrack: the
  // inherited basis encodes the previous subtree's routing and the dual
  // simplex would spend thousands of pivots walking back from it.
  void reseed_basis() {
    std::vector<int> hint(solver_->num_rows());
    for (int pr = 0; pr < np_; ++pr) hint[pr] = argmin_col_[pr];
    for (int q = np_; q < solver_->num_rows(); ++q)
      hint[q] = solver_->num_vars() + q;
    solver_->set_basis(hint);
  }

  enum class NodeResult { Solved, Infeasible, OutOfTime };

  // Solves with delayed generation of the per-pair linking rows.  `clean`
  // reports whether the final solution satisfies every linking row,
  // generated or not.
  NodeResult solve_node(lp::Solution& sol, bool& clean,
                        const std::optional<Clock::time_point>& deadline,
                        int rounds) {
    clean = false;
    const bool trace = std::getenv("HUBQ_BNB_TRACE") != nullptr;
    for (int round = 0; round < rounds; ++round) {
      if (deadline) {
        const double left =
            std::chrono::duration<double>(*deadline - Clock::now()).count();
        if (left <= 0.0) return NodeResult::OutOfTime;
        solver_->set_time_limit(left);
      }
      const auto rt0 = Clock::now();
      sol = solver_->solve();
      if (trace)
        std::fprintf(stderr, "round %d: solve %.2fs iters=%d rows=%d obj=%.4f\n",
                     round,
                     std::chrono::duration<double>(Clock::now() - rt0).count(),
                     sol.iterations, solver_->num_rows(), sol.objective);
      if (sol.status == lp::Status::TimeLimit) return NodeResult::OutOfTime;
      if (sol.status == lp::Status::Infeasible) return NodeResult::Infeasible;
      if (sol.status != lp::Status::Optimal)
        throw std::runtime_error("branch and bound: node LP did not converge");

      struct Viol {
        double amount;
        int pr, k;
      };
      std::vector<Viol> viols;
      for (int pr = 0; pr < np_; ++pr) {
        for (int k = 0; k < n_; ++k) {
          if (closed_[k]) continue;  // columns already pinned to zero
          if (applied_[k] == 1) continue;  // Y = 1 dominates any row sum
          if (link_added_[static_cast<size_t>(pr) * n_ + k]) continue;
          double lhs = 0.0;
          for (int m = 0; m < n_; ++m) {
            lhs += sol.x[xcol(pr, k, m)];
            if (m != k) lhs += sol.x[xcol(pr, m, k)];
          }
          const double y = sol.x[ycol(k)];
          if (lhs > y + 1e-7) viols.push_back({lhs - y, pr, k});
        }
      }
      if (viols.empty()) {
        clean = true;
        return NodeResult::Solved;
      }
      if (link_rows_ >= kLinkPoolCap)
        return NodeResult::Solved;  // bound stays valid, weaker
      std::stable_sort(viols.begin(), viols.end(),
                       [](const Viol& a, const Viol& b) { return a.amount > b.amount; });
      const int batch = std::min<int>(static_cast<int>(viols.size()),
                                      std::min(200, kLinkPoolCap - link_rows_));
      for (int v = 0; v < batch; ++v) add_link_row(viols[v].pr, viols[v].k);
      if (deadline && Clock::now() >= *deadline) return NodeResult::Solved;
    }
    return NodeResult::Solved;  // round cap reached; bound valid for the pool
  }

  void add_link_row(int pr, int k) {
    std::vector<std::pair<int, double>> terms;
    terms.reserve(2 * n_);
    for (int m = 0; m < n_; ++m) {
      terms.emplace_back(xcol(pr, k, m), 1.0);
      if (m != k) terms.emplace_back(xcol(pr, m, k), 1.0);
    }
    terms.emplace_back(ycol(k), -1.0);
    solver_->add_row(lp::RowSense::LessEqual, 0.0, std::move(terms));
    link_added_[static_cast<size_t>(pr) * n_ + k] = 1;
    ++link_rows_;
  }

  bool prunable(double bound, const Node& nd) const {
    if (!incumbent_) return false;
    const double tie = 1e-9 * (1.0 + std::abs(incumbent_->obj));
    if (bound > incumbent_->obj + tie) return true;
    if (bound < incumbent_->obj - tie) return false;
    // Equal-bound subtree: only worth exploring if it could improve the
    // tie-break, i.e. reach a lexicographically smaller hub set.
    std::vector<int> lex_lb;
    for (int k = 0; k < n_ && static_cast<int>(lex_lb.size()) < p_; ++k)
      if ((nd.fix1 >> k) & 1 || !((nd.fix0 >> k) & 1)) lex_lb.push_back(k);
    return !std::lexicographical_compare(lex_lb.begin(), lex_lb.end(),
                                         incumbent_->hubs.begin(),
                                         incumbent_->hubs.end());
  }

  void offer_incumbent(const std::vector<int>& H) {
    if (static_cast<int>(H.size()) != p_) return;
    Allocation alloc = allocation_lp(inst_, ct_, w_sym_, a_sym_, H, cap_, cfg_);
    if (!alloc.feasible) return;
    double obj = alloc.transport;
    for (int k : H) obj += inst_.hub_cost(k);
    if (literal_arc_) {
      obj += alloc.arc_literal;
    } else {
      for (size_t a = 0; a < H.size(); ++a)
        for (size_t b = a + 1; b < H.size(); ++b)
          obj += inst_.arc_cost(H[a], H[b]);
    }
    if (!incumbent_ || obj < incumbent_->obj ||
        (obj == incumbent_->obj &&
         std::lexicographical_compare(H.begin(), H.end(), incumbent_->hubs.begin(),
                                      incumbent_->hubs.end()))) {
      incumbent_ = Incumbent{obj, H};
    }
  }

  HubDesign make_final(const std::vector<int>& H) {
    Allocation alloc = allocation_lp(inst_, ct_, w_sym_, a_sym_, H, cap_, cfg_);
    HubDesign d;
    d.status = SolveStatus::Optimal;
    d.hubs = H;
    d.transport_cost = alloc.transport;
    for (int k : H) d.hub_fixed_cost += inst_.hub_cost(k);
    if (literal_arc_) {
      d.arc_fixed_cost = alloc.arc_literal;
    } else {
      for (size_t a = 0; a < H.size(); ++a)
        for (size_t b = a + 1; b < H.size(); ++b)
          d.arc_fixed_cost += inst_.arc_cost(H[a], H[b]);
    }
    d.objective = d.transport_cost + d.hub_fixed_cost + d.arc_fixed_cost;
    d.routing = std::move(alloc.routing);
    d.hub_arrivals = std::move(alloc.hub_arrivals);
    d.server_arrivals.resize(n_);
    for (int k : H)
      for (double beta : cap_.beta[k])
        d.server_arrivals[k].push_back(beta * d.hub_arrivals[k]);
    return d;
  }

  struct Incumbent {
    double obj;
    std::vector<int> hubs;
  };

  // Generated rows are never removed, so the pool bounds the basis size;
  // past this point nodes fall back to the weaker pool-relative bound.
  static constexpr int kLinkPoolCap = 500;
  // Node switches that change more hubs than this restart from the argmin
  // basis instead of warming from the previous node's.
  static constexpr int kReseedJump = 6;

  const NetworkInstance& inst_;
  const CapacityProfile& cap_;
  const ScenarioConfig& cfg_;
  int n_, p_, np_ = 0;
  Matrix w_sym_, a_sym_;
  CostTensor ct_;
  bool literal_arc_, lit19_;
  std::vector<std::pair<int, int>> pair_ij_;

  int z_base_ = -1;
  int x_base_ = -1;
  std::vector<int> z_of_;
  std::vector<int> argmin_col_;
  std::optional<lp::IncrementalSolver> solver_;
  std::vector<char> link_added_;
  int link_rows_ = 0;
  std::vector<int> applied_;
  std::vector<char> closed_;
  std::optional<Incumbent> incumbent_;
};

}  // namespace

HubDesign branch_and_bound(const NetworkInstance& inst, const Matrix& arrivals,
                           const CapacityProfile& cap, const ScenarioConfig& cfg) {
  Tree tree(inst, arrivals, cap, cfg);
  return tree.run();
}

}  // namespace hubq
