#pragma once

// Placement of instances onto NFP servers and the cost/constraint model that
// every solver shares.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfp/error.hpp"
#include "nfp/sfc_model.hpp"

namespace nfp {

using ServerId = int;
inline constexpr ServerId kUnassigned = -1;

/// Homogeneous server description of the pool attached to the switch fabric.
struct ServerPool {
  double compute_capacity = 1000.0;  // T_n
  double link_bandwidth = 1000.0;    // B(l_s^n)
  std::size_t port_limit = 32;       // P
  double unit_link_cost = 1.0;       // U

  void validate() const {
    if (!(compute_capacity > 0.0)) throw InvalidArgument("compute capacity must be positive");
    if (!(link_bandwidth > 0.0)) throw InvalidArgument("link bandwidth must be positive");
    if (port_limit < 1) throw InvalidArgument("port limit must be at least 1");
    if (!(unit_link_cost >= 0.0)) throw InvalidArgument("unit link cost must be nonnegative");
  }
};

/// `a <= b` up to the library's relative tolerance.
inline bool fits(double a, double b) { return a <= b + kRelTol * std::max(1.0, std::abs(b)); }

struct Neighbor {
  NodeId node;
  double weight;  // c_ab + c_ba
};

/// Symmetrized adjacency of an instance graph plus the per-node quantities the
/// solvers read on every move. Parallel and antiparallel edges are merged.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(const SfcIGraph& ig) : demand_(ig.size()), external_(ig.size()) {
    const auto n = ig.size();
    std::vector<std::vector<Neighbor>> lists(n);
    for (const auto& e : ig.edges) {
      if (e.from == e.to || e.weight == 0.0) continue;
      lists[e.from].push_back({e.to, e.weight});
      lists[e.to].push_back({e.from, e.weight});
      ++edge_count_;
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      auto& l = lists[v];
      std::sort(l.begin(), l.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
      std::vector<Neighbor> merged;
      for (const auto& nb : l) {
        if (!merged.empty() && merged.back().node == nb.node) merged.back().weight += nb.weight;
        else merged.push_back(nb);
      }
      offsets_[v + 1] = offsets_[v] + merged.size();
      flat_.insert(flat_.end(), merged.begin(), merged.end());
      demand_[v] = ig.nodes[v].demand;
      external_[v] = ig.nodes[v].ingress + ig.nodes[v].egress;
    }
  }

  std::size_t size() const { return demand_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const Neighbor> neighbors(NodeId v) const {
    return {flat_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  double demand(NodeId v) const { return demand_[v]; }
  double external(NodeId v) const { return external_[v]; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> flat_;
  std::vector<double> demand_;
  std::vector<double> external_;
  std::size_t edge_count_ = 0;
};

/// Assignment y of instances to server slots with cached per-server usage.
/// Server slots are opened in index order; a slot with no members is unused
/// (x_n = 0). Link usage counts external traffic of hosted instances plus every
/// edge with exactly one assigned endpoint on the server and the other endpoint
/// assigned elsewhere.
class Placement {
 public:
  Placement() = default;
  explicit Placement(std::size_t nodes) : server_of_(nodes, kUnassigned) {}

  static Placement from_assignment(const std::vector<ServerId>& assignment, const Adjacency& adj) {
    Placement p(adj.size());
    for (NodeId v = 0; v < assignment.size() && v < adj.size(); ++v)
      if (assignment[v] != kUnassigned) p.assign(v, assignment[v], adj);
    return p;
  }

  std::size_t size() const { return server_of_.size(); }
  ServerId server_of(NodeId v) const { return server_of_[v]; }
  const std::vector<ServerId>& assignment() const { return server_of_; }
  bool complete() const {
    return std::none_of(server_of_.begin(), server_of_.end(), [](ServerId s) { return s == kUnassigned; });
  }

  std::size_t server_slots() const { return compute_.size(); }
  std::size_t used_servers() const { return used_; }
  bool is_used(ServerId s) const { return s >= 0 && static_cast<std::size_t>(s) < members_.size() && members_[s] > 0; }
  std::size_t member_count(ServerId s) const { return members_[s]; }
  double compute_usage(ServerId s) const { return compute_[s]; }
  double link_usage(ServerId s) const { return link_[s]; }

  /// Lowest-index slot with no members, opening a new slot if needed.
  ServerId first_empty_slot() const {
    for (std::size_t s = 0; s < members_.size(); ++s)
      if (members_[s] == 0) return static_cast<ServerId>(s);
    return static_cast<ServerId>(members_.size());
  }

  void assign(NodeId v, ServerId s, const Adjacency& adj) {
    if (s < 0) throw InvalidArgument("negative server index");
    grow(s);
    server_of_[v] = s;
    if (members_[s]++ == 0) ++used_;
    compute_[s] += adj.demand(v);
    link_[s] += adj.external(v);
    for (const auto& nb : adj.neighbors(v)) {
      const ServerId r = server_of_[nb.node];
      if (r == kUnassigned || r == s) continue;
      link_[s] += nb.weight;
      link_[r] += nb.weight;
    }
  }

  void unassign(NodeId v, const Adjacency& adj) {
    const ServerId s = server_of_[v];
    if (s == kUnassigned) return;
    for (const auto& nb : adj.neighbors(v)) {
      const ServerId r = server_of_[nb.node];
      if (r == kUnassigned || r == s) continue;
      link_[s] -= nb.weight;
      link_[r] -= nb.weight;
    }
    link_[s] -= adj.external(v);
    compute_[s] -= adj.demand(v);
    if (--members_[s] == 0) {
      --used_;
      compute_[s] = 0.0;
      link_[s] = 0.0;
    }
    server_of_[v] = kUnassigned;
  }

  void move(NodeId v, ServerId to, const Adjacency& adj) {
    unassign(v, adj);
    assign(v, to, adj);
  }

  /// Compute and link usage a server would have after moving `v` onto `to`.
  /// Only the source and target servers change.
  struct MoveEffect {
    double target_compute;
    double target_link;
    double source_link;
  };
  MoveEffect move_effect(NodeId v, ServerId to, const Adjacency& adj) const {
    const ServerId from = server_of_[v];
    const bool target_open = to >= 0 && static_cast<std::size_t>(to) < members_.size() && members_[to] > 0;
    MoveEffect fx{target_open ? compute_[to] : 0.0, target_open ? link_[to] : 0.0,
                  from == kUnassigned ? 0.0 : link_[from]};
    fx.target_compute += adj.demand(v);
    fx.target_link += adj.external(v);
    if (from != kUnassigned) fx.source_link -= adj.external(v);
    for (const auto& nb : adj.neighbors(v)) {
      const ServerId r = server_of_[nb.node];
      if (r == kUnassigned) continue;
      if (r == from) {
        fx.source_link += nb.weight;  // becomes crossing
        fx.target_link += nb.weight;
      } else if (r == to) {
        if (from == kUnassigned) continue;
        fx.target_link -= nb.weight;  // becomes internal
        fx.source_link -= nb.weight;
      } else if (from != kUnassigned) {
        fx.source_link -= nb.weight;
        fx.target_link += nb.weight;
      } else {
        fx.target_link += nb.weight;
      }
    }
    return fx;
  }

  friend bool operator==(const Placement&, const Placement&) = default;

 private:
  void grow(ServerId s) {
    const auto need = static_cast<std::size_t>(s) + 1;
    if (compute_.size() < need) {
      compute_.resize(need, 0.0);
      link_.resize(need, 0.0);
      members_.resize(need, 0);
    }
  }

  std::vector<ServerId> server_of_;
  std::vector<double> compute_;
  std::vector<double> link_;
  std::vector<std::size_t> members_;
  std::size_t used_ = 0;
};

struct CrossingEdge {
  NodeId from;
  NodeId to;
  double weight;
};

struct CostReport {
  double total_cost = 0.0;                // Cost_L
  std::vector<double> crossing_traffic;   // Cost_{l_s}^n, ingress side, per server slot
  std::vector<double> link_load;          // per server slot
  std::vector<CrossingEdge> crossing;
};

inline std::size_t server_slot_count(const std::vector<ServerId>& y) {
  ServerId hi = -1;
  for (auto s : y) hi = std::max(hi, s);
  return static_cast<std::size_t>(hi + 1);
}

inline void require_complete(const std::vector<ServerId>& y, const SfcIGraph& ig) {
  for (NodeId v = 0; v < ig.size(); ++v)
    if (v >= y.size() || y[v] == kUnassigned) throw UnassignedNode(v);
}

/// Per-server compute usage recomputed from scratch.
inline std::vector<double> compute_usage(const std::vector<ServerId>& y, const SfcIGraph& ig) {
  std::vector<double> use(server_slot_count(y), 0.0);
  for (NodeId v = 0; v < ig.size() && v < y.size(); ++v)
    if (y[v] != kUnassigned) use[y[v]] += ig.nodes[v].demand;
  return use;
}

/// Per-server link load recomputed from scratch: external traffic of
/// hosted instances plus each crossing edge on both of its servers.
inline std::vector<double> link_usage(const std::vector<ServerId>& y, const SfcIGraph& ig) {
  std::vector<double> load(server_slot_count(y), 0.0);
  auto at = [&](NodeId v) { return v < y.size() ? y[v] : kUnassigned; };
  for (NodeId v = 0; v < ig.size(); ++v)
    if (at(v) != kUnassigned) load[at(v)] += ig.nodes[v].ingress + ig.nodes[v].egress;
  for (const auto& e : ig.edges) {
    const ServerId a = at(e.from), b = at(e.to);
    if (a == kUnassigned || b == kUnassigned || a == b) continue;
    load[a] += e.weight;
    load[b] += e.weight;
  }
  return load;
}

/// Cost_L = U * sum of c_ij over edges whose endpoints sit on different servers.
inline CostReport evaluate_cost(const std::vector<ServerId>& y, const SfcIGraph& ig, const ServerPool& pool) {
  require_complete(y, ig);
  CostReport r;
  r.crossing_traffic.assign(server_slot_count(y), 0.0);
  r.link_load = link_usage(y, ig);
  double raw = 0.0;
  for (const auto& e : ig.edges) {
    if (y[e.from] == y[e.to] || e.weight == 0.0) continue;
    r.crossing.push_back({e.from, e.to, e.weight});
    r.crossing_traffic[y[e.to]] += e.weight * pool.unit_link_cost;
    raw += e.weight;
  }
  r.total_cost = raw * pool.unit_link_cost;
  return r;
}

inline CostReport evaluate_cost(const Placement& p, const SfcIGraph& ig, const ServerPool& pool) {
  return evaluate_cost(p.assignment(), ig, pool);
}

/// Compute capacity check per server slot.
inline std::vector<bool> check_capacity(const std::vector<ServerId>& y, const SfcIGraph& ig, const ServerPool& pool) {
  auto use = compute_usage(y, ig);
  std::vector<bool> ok(use.size());
  for (std::size_t s = 0; s < use.size(); ++s) ok[s] = fits(use[s], pool.compute_capacity);
  return ok;
}

/// Link bandwidth check per server slot.
inline std::vector<bool> check_bandwidth(const std::vector<ServerId>& y, const SfcIGraph& ig, const ServerPool& pool) {
  auto load = link_usage(y, ig);
  std::vector<bool> ok(load.size());
  for (std::size_t s = 0; s < load.size(); ++s) ok[s] = fits(load[s], pool.link_bandwidth);
  return ok;
}

inline std::size_t used_server_count(const std::vector<ServerId>& y) {
  std::vector<bool> used(server_slot_count(y), false);
  for (auto s : y)
    if (s != kUnassigned) used[s] = true;
  return static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
}

/// Number of servers carrying at least one instance is at most P.
inline bool check_port_limit(const std::vector<ServerId>& y, const ServerPool& pool) {
  return used_server_count(y) <= pool.port_limit;
}

struct Violation {
  enum class Constraint { Assignment, Capacity, Bandwidth, PortLimit };
  Constraint constraint;
  std::size_t index;  // node for Assignment, server otherwise
  std::string message;
};

struct Feasibility {
  bool ok = true;
  std::vector<Violation> violations;
  explicit operator bool() const { return ok; }
};

inline Feasibility is_feasible(const std::vector<ServerId>& y, const SfcIGraph& ig, const ServerPool& pool) {
  using C = Violation::Constraint;
  Feasibility f;
  auto add = [&](C c, std::size_t i, std::string msg) {
    f.ok = false;
    f.violations.push_back({c, i, std::move(msg)});
  };
  for (NodeId v = 0; v < ig.size(); ++v)
    if (v >= y.size() || y[v] == kUnassigned) add(C::Assignment, v, "NFI " + std::to_string(v) + " is not placed");
  if (y.size() > ig.size()) add(C::Assignment, ig.size(), "placement names more NFIs than the instance has");
  const auto cap = check_capacity(y, ig, pool);
  for (std::size_t s = 0; s < cap.size(); ++s)
    if (!cap[s]) add(C::Capacity, s, "server " + std::to_string(s) + " exceeds compute capacity");
  const auto bw = check_bandwidth(y, ig, pool);
  for (std::size_t s = 0; s < bw.size(); ++s)
    if (!bw[s]) add(C::Bandwidth, s, "server " + std::to_string(s) + " exceeds link bandwidth");
  if (!check_port_limit(y, pool))
    add(C::PortLimit, used_server_count(y), "more servers in use than switch ports");
  return f;
}

inline Feasibility is_feasible(const Placement& p, const SfcIGraph& ig, const ServerPool& pool) {
  return is_feasible(p.assignment(), ig, pool);
}

}  // namespace nfp
