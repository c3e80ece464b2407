#pragma once

// Two-phase placement heuristic: DFS + min-RRC greedy initial deployment
// followed by Fiduccia-Mattheyses style passes driven by the relevancy degree
// RD_{n,k} = E_{n,k} - I_n, with node locking and best-prefix commit.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "nfp/error.hpp"
#include "nfp/placement.hpp"
#include "nfp/sfc_model.hpp"

namespace nfp {

/// Target meaning "a server slot that is currently empty".
inline constexpr ServerId kFreshServer = -2;

struct RdEntry {
  NodeId node = 0;
  ServerId target = 0;
  double rd = 0.0;
  std::uint32_t stamp = 0;
};

struct MoveRecord {
  NodeId node = 0;
  ServerId from = 0;
  ServerId to = 0;
  double rd = 0.0;
  std::size_t seq = 0;  // 1-based within a pass
  bool opened_server = false;
};

struct PassResult {
  std::vector<MoveRecord> tentative;  // every move tried, in order
  std::size_t committed = 0;          // length of the kept prefix
  double gain = 0.0;                  // best prefix sum G
};

struct SolveStats {
  std::size_t times = 1;  // iterations including the initial deployment
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> pass_gains;     // committed passes only
  std::vector<std::size_t> pass_moves;
  double wall_seconds = 0.0;
};

struct SolveResult {
  Placement placement;
  SolveStats stats;
};

/// One line of the optional per-move trace.
struct TraceEvent {
  std::size_t pass;
  MoveRecord move;
  bool committed;
};
using TraceSink = std::function<void(const TraceEvent&)>;

/// Depth-first preorder from every zero in-degree node (ascending id), following
/// successors in ascending id; unreached nodes start new searches in id order.
inline std::vector<NodeId> dfs_order(const SfcIGraph& ig) {
  const auto n = ig.size();
  std::vector<std::vector<NodeId>> succ(n);
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : ig.edges) {
    if (e.from == e.to) continue;
    succ[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  for (auto& s : succ) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<bool> seen(n, false);
  auto visit = [&](NodeId root) {
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      if (seen[v]) continue;
      seen[v] = true;
      order.push_back(v);
      for (auto it = succ[v].rbegin(); it != succ[v].rend(); ++it)
        if (!seen[*it]) stack.push_back(*it);
    }
  };
  for (NodeId v = 0; v < n; ++v)
    if (indeg[v] == 0 && !seen[v]) visit(v);
  for (NodeId v = 0; v < n; ++v)
    if (!seen[v]) visit(v);
  return order;
}

/// Whether assigning the unplaced node `v` to `s` keeps every affected server
/// within compute and link limits. Servers of already-placed neighbors gain crossing load.
inline bool can_host(const Placement& p, NodeId v, ServerId s, const Adjacency& adj, const ServerPool& pool) {
  const auto fx = p.move_effect(v, s, adj);
  if (!fits(fx.target_compute, pool.compute_capacity) || !fits(fx.target_link, pool.link_bandwidth)) return false;
  std::vector<std::pair<ServerId, double>> extra;
  for (const auto& nb : adj.neighbors(v)) {
    const ServerId r = p.server_of(nb.node);
    if (r == kUnassigned || r == s) continue;
    auto it = std::find_if(extra.begin(), extra.end(), [r](const auto& x) { return x.first == r; });
    if (it == extra.end()) extra.emplace_back(r, nb.weight);
    else it->second += nb.weight;
  }
  for (auto [r, w] : extra)
    if (!fits(p.link_usage(r) + w, pool.link_bandwidth)) return false;
  return true;
}

/// Stage 1: DFS traversal, each node onto the feasible open server with the
/// least remaining compute (earliest-opened on ties), opening a server when
/// none fits and the port limit allows.
inline Placement initial_deployment(const SfcIGraph& ig, const Adjacency& adj, const ServerPool& pool) {
  pool.validate();
  Placement p(ig.size());
  for (NodeId v : dfs_order(ig)) {
    ServerId best = kUnassigned;
    double best_rrc = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < p.server_slots(); ++s) {
      const auto sid = static_cast<ServerId>(s);
      if (!p.is_used(sid) || !can_host(p, v, sid, adj, pool)) continue;
      const double rrc = pool.compute_capacity - p.compute_usage(sid);
      if (rrc < best_rrc) {
        best_rrc = rrc;
        best = sid;
      }
    }
    if (best == kUnassigned) {
      if (p.used_servers() >= pool.port_limit)
        throw Infeasible("NFI " + std::to_string(v) + " fits no open server and all " +
                         std::to_string(pool.port_limit) + " ports are in use");
      best = p.first_empty_slot();
      if (!can_host(p, v, best, adj, pool))
        throw Infeasible("NFI " + std::to_string(v) + " does not fit on an empty server");
    }
    p.assign(v, best, adj);
  }
  return p;
}

inline Placement initial_deployment(const SfcIGraph& ig, const ServerPool& pool) {
  return initial_deployment(ig, Adjacency(ig), pool);
}

/// RD_{n,k}: symmetrized traffic from n to nodes on k minus traffic from n to
/// nodes sharing its own server. Equals the drop in Cost_L (per unit U) if n
/// moves to k.
inline double relevancy_degree(NodeId n, ServerId k, const Placement& p, const Adjacency& adj) {
  const ServerId own = p.server_of(n);
  if (own == kUnassigned) throw UnassignedNode(n);
  if (k == own) throw SameServer("NFI " + std::to_string(n) + " already sits on server " + std::to_string(k));
  double external = 0.0, internal = 0.0;
  for (const auto& nb : adj.neighbors(n)) {
    const ServerId r = p.server_of(nb.node);
    if (r == own) internal += nb.weight;
    else if (r == k) external += nb.weight;
  }
  return external - internal;
}

inline double relevancy_degree(NodeId n, ServerId k, const Placement& p, const SfcIGraph& ig) {
  return relevancy_degree(n, k, p, Adjacency(ig));
}

namespace detail {

/// Max-heap order: larger RD first, then lower node id, then lower target with
/// the fresh-server target last.
struct RdLess {
  static std::int64_t target_rank(ServerId t) {
    return t == kFreshServer ? std::numeric_limits<std::int64_t>::max() : t;
  }
  bool operator()(const RdEntry& a, const RdEntry& b) const {
    if (a.rd != b.rd) return a.rd < b.rd;
    if (a.node != b.node) return a.node > b.node;
    return target_rank(a.target) > target_rank(b.target);
  }
};

class PassState {
 public:
  PassState(Placement& p, const Adjacency& adj, const ServerPool& pool)
      : p_(p), adj_(adj), pool_(pool), locked_(adj.size(), false), stamps_(adj.size()) {}

  void seed_heap() {
    for (NodeId n = 0; n < adj_.size(); ++n) push_all_targets(n);
  }

  /// Pops the best currently valid and feasible entry; parks valid entries that
  /// are infeasible right now so they can be retried after the next move.
  bool next_move(RdEntry& out) {
    while (!heap_.empty()) {
      RdEntry e = heap_.top();
      heap_.pop();
      if (!valid(e)) continue;
      if (!feasible(e.node, resolve(e.target))) {
        parked_.push_back(e);
        continue;
      }
      out = e;
      return true;
    }
    return false;
  }

  MoveRecord apply(const RdEntry& e, std::size_t seq) {
    const NodeId v = e.node;
    const ServerId from = p_.server_of(v);
    const ServerId to = resolve(e.target);
    const bool opened = !p_.is_used(to);
    p_.move(v, to, adj_);
    locked_[v] = true;

    if (opened) {
      for (NodeId n = 0; n < adj_.size(); ++n)
        if (!locked_[n] && p_.server_of(n) != to) push(n, to);
    }
    for (const auto& nb : adj_.neighbors(v)) {
      const NodeId w = nb.node;
      if (locked_[w]) continue;
      const ServerId home = p_.server_of(w);
      if (home == from || home == to) {
        push_all_targets(w);  // I_w changed
      } else {
        push(w, from);
        push(w, to);
      }
    }
    for (const auto& parked : parked_) heap_.push(parked);
    parked_.clear();
    return {v, from, to, e.rd, seq, opened};
  }

 private:
  std::uint32_t& stamp(NodeId n, ServerId t) {
    // Slot 0 holds the fresh-server target, slot s + 1 server s.
    auto& row = stamps_[n];
    const std::size_t idx = t == kFreshServer ? 0 : static_cast<std::size_t>(t) + 1;
    if (row.size() <= idx) row.resize(idx + 1, 0);
    return row[idx];
  }

  bool valid(const RdEntry& e) {
    if (locked_[e.node]) return false;
    if (e.target != kFreshServer && (e.target == p_.server_of(e.node) || !p_.is_used(e.target))) return false;
    return e.stamp == stamp(e.node, e.target);
  }

  ServerId resolve(ServerId t) const { return t == kFreshServer ? p_.first_empty_slot() : t; }

  bool feasible(NodeId v, ServerId to) const {
    const ServerId from = p_.server_of(v);
    if (to == from) return false;
    if (!p_.is_used(to)) {
      const std::size_t after = p_.used_servers() + 1 - (p_.member_count(from) == 1 ? 1 : 0);
      if (after > pool_.port_limit) return false;
    }
    const auto fx = p_.move_effect(v, to, adj_);
    return fits(fx.target_compute, pool_.compute_capacity) && fits(fx.target_link, pool_.link_bandwidth) &&
           fits(fx.source_link, pool_.link_bandwidth);
  }

  void push(NodeId n, ServerId t) {
    const ServerId own = p_.server_of(n);
    if (t == own) return;
    // An empty or fresh target has no members, so E = 0 and RD = -I_n.
    heap_.push({n, t, relevancy_degree(n, t, p_, adj_), ++stamp(n, t)});
  }

  void push_all_targets(NodeId n) {
    for (std::size_t s = 0; s < p_.server_slots(); ++s)
      if (p_.is_used(static_cast<ServerId>(s))) push(n, static_cast<ServerId>(s));
    push(n, kFreshServer);
  }

  Placement& p_;
  const Adjacency& adj_;
  const ServerPool& pool_;
  std::vector<bool> locked_;
  std::vector<std::vector<std::uint32_t>> stamps_;
  std::priority_queue<RdEntry, std::vector<RdEntry>, RdLess> heap_;
  std::vector<RdEntry> parked_;
};

}  // namespace detail

/// Threshold below which a pass gain counts as no improvement.
inline double gain_epsilon(const SfcIGraph& ig) { return kRelTol * std::max(1.0, ig.total_traffic()); }

/// One FM pass over a feasible placement. Moves are applied tentatively in RD
/// order, each moved node locked; afterwards the prefix with the largest RD sum
/// G is kept. With G <= eps the placement is restored exactly.
inline PassResult optimization_pass(Placement& p, const Adjacency& adj, const ServerPool& pool, double eps = 0.0) {
  const Placement snapshot = p;
  PassResult result;
  {
    detail::PassState state(p, adj, pool);
    state.seed_heap();
    RdEntry e;
    while (state.next_move(e)) result.tentative.push_back(state.apply(e, result.tentative.size() + 1));
  }

  double running = 0.0;
  for (std::size_t m = 0; m < result.tentative.size(); ++m) {
    running += result.tentative[m].rd;
    if (running > result.gain) {
      result.gain = running;
      result.committed = m + 1;
    }
  }
  p = snapshot;
  if (result.gain > eps) {
    for (std::size_t m = 0; m < result.committed; ++m) p.move(result.tentative[m].node, result.tentative[m].to, adj);
  } else {
    result.committed = 0;
  }
  return result;
}

inline SolveResult solve(const SfcIGraph& ig, const ServerPool& pool, const TraceSink& trace = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Adjacency adj(ig);
  SolveResult out{initial_deployment(ig, adj, pool), {}};
  out.stats.initial_cost = evaluate_cost(out.placement, ig, pool).total_cost;
  const double eps = gain_epsilon(ig);
  for (std::size_t pass = 1;; ++pass) {
    auto r = optimization_pass(out.placement, adj, pool, eps);
    if (trace)
      for (std::size_t i = 0; i < r.tentative.size(); ++i) trace({pass, r.tentative[i], i < r.committed});
    if (r.committed == 0) break;
    ++out.stats.times;
    out.stats.pass_gains.push_back(r.gain);
    out.stats.pass_moves.push_back(r.committed);
  }
  out.stats.final_cost = evaluate_cost(out.placement, ig, pool).total_cost;
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace nfp
