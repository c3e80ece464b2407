#pragma once

// SFC requests, the merged NF-level graph and its expansion into an
// instance-level traffic graph.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nfp/error.hpp"

namespace nfp {

using NfId = int;
using NodeId = std::size_t;

/// Relative tolerance for comparisons of accumulated traffic and demand sums.
inline constexpr double kRelTol = 1e-9;

inline bool approx_equal(double a, double b, double rel = kRelTol) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

struct NfType {
  NfId id = 0;
  std::string name;

  friend bool operator==(const NfType&, const NfType&) = default;
};

/// One service function chain: an ordered list of NF types with a bandwidth
/// requirement and the compute demand it places on each NF of the chain.
struct SfcRequest {
  int id = 0;
  std::vector<NfId> chain;
  double bandwidth = 0.0;
  std::vector<double> demands;  // aligned with chain

  friend bool operator==(const SfcRequest&, const SfcRequest&) = default;
};

/// Throws InvalidArgument when the request breaks its invariants.
inline void check_request(const SfcRequest& r) {
  const std::string who = "SFC " + std::to_string(r.id) + ": ";
  if (r.chain.empty()) throw InvalidArgument(who + "empty chain");
  if (r.demands.size() != r.chain.size()) throw InvalidArgument(who + "one demand per NF required");
  if (!(r.bandwidth > 0.0)) throw InvalidArgument(who + "bandwidth must be positive");
  for (double d : r.demands)
    if (!(d > 0.0)) throw InvalidArgument(who + "demands must be positive");
  std::set<NfId> seen(r.chain.begin(), r.chain.end());
  if (seen.size() != r.chain.size()) throw InvalidArgument(who + "NF type repeats within chain");
}

struct SfcGraphVertex {
  NfId nf = 0;
  double demand = 0.0;   // aggregated C_f
  double ingress = 0.0;  // bandwidth of chains starting at this NF
  double egress = 0.0;   // bandwidth of chains ending at this NF

  friend bool operator==(const SfcGraphVertex&, const SfcGraphVertex&) = default;
};

struct SfcGraphEdge {
  NfId from = 0;
  NfId to = 0;
  double weight = 0.0;
  std::vector<int> sfcs;  // contributing request ids, ascending

  friend bool operator==(const SfcGraphEdge&, const SfcGraphEdge&) = default;
};

/// NF-level DAG. Vertices are sorted by NF id, edges by (from, to).
struct SfcGraph {
  std::vector<SfcGraphVertex> vertices;
  std::vector<SfcGraphEdge> edges;

  const SfcGraphVertex* vertex(NfId nf) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), nf,
                               [](const SfcGraphVertex& v, NfId id) { return v.nf < id; });
    return it != vertices.end() && it->nf == nf ? &*it : nullptr;
  }
  const SfcGraphEdge* edge(NfId from, NfId to) const {
    for (const auto& e : edges)
      if (e.from == from && e.to == to) return &e;
    return nullptr;
  }
  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.weight;
    return s;
  }

  friend bool operator==(const SfcGraph&, const SfcGraph&) = default;
};

/// A network-function instance.
struct Nfi {
  NodeId id = 0;
  NfId nf = 0;
  double demand = 0.0;
  double ingress = 0.0;
  double egress = 0.0;

  friend bool operator==(const Nfi&, const Nfi&) = default;
};

/// Directed traffic c_ij between two instances.
struct TrafficEdge {
  NodeId from = 0;
  NodeId to = 0;
  double weight = 0.0;

  friend bool operator==(const TrafficEdge&, const TrafficEdge&) = default;
};

/// NF-level edge weight the instance-level blocks must add up to.
struct NfEdge {
  NfId from = 0;
  NfId to = 0;
  double weight = 0.0;

  friend bool operator==(const NfEdge&, const NfEdge&) = default;
};

/// Instance-granularity traffic DAG. Node ids are dense indices into `nodes`.
struct SfcIGraph {
  std::vector<Nfi> nodes;
  std::vector<TrafficEdge> edges;
  std::vector<NfEdge> nf_edges;

  std::size_t size() const { return nodes.size(); }

  std::vector<NodeId> instances_of(NfId nf) const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
      if (n.nf == nf) out.push_back(n.id);
    return out;
  }

  /// N_f^i for every NF present, keyed by NF id.
  std::map<NfId, std::size_t> instance_counts() const {
    std::map<NfId, std::size_t> out;
    for (const auto& n : nodes) ++out[n.nf];
    return out;
  }

  double total_traffic() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.weight;
    return s;
  }

  /// Number of edges carrying nonzero traffic from instances of `u` to instances of `v`.
  std::size_t block_edge_count(NfId u, NfId v) const {
    std::size_t count = 0;
    for (const auto& e : edges)
      if (e.weight != 0.0 && nodes[e.from].nf == u && nodes[e.to].nf == v) ++count;
    return count;
  }

  friend bool operator==(const SfcIGraph&, const SfcIGraph&) = default;
};

/// Kahn's algorithm with smallest-id-first tie breaking. Returns nullopt on a cycle.
/// Self-loops are reported as cycles.
inline std::optional<std::vector<std::size_t>> topological_order(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indeg(n, 0);
  for (auto [a, b] : arcs) {
    out[a].push_back(b);
    ++indeg[b];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto w : out[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

/// NF ids of the graph in topological order (ties by smaller id).
inline std::vector<NfId> nf_topological_order(const SfcGraph& g) {
  std::map<NfId, std::size_t> index;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) index[g.vertices[i].nf] = i;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (const auto& e : g.edges) arcs.emplace_back(index.at(e.from), index.at(e.to));
  auto order = topological_order(g.vertices.size(), arcs);
  if (!order) throw CycleDetected("SFC-Graph contains a directed cycle");
  std::vector<NfId> out;
  for (auto i : *order) out.push_back(g.vertices[i].nf);
  return out;
}

/// Merges requests sharing NF types into one weighted NF-level DAG.
inline SfcGraph build_sfc_graph(const std::vector<SfcRequest>& requests) {
  std::map<NfId, SfcGraphVertex> vertices;
  std::map<std::pair<NfId, NfId>, SfcGraphEdge> edges;
  for (const auto& r : requests) {
    check_request(r);
    for (std::size_t i = 0; i < r.chain.size(); ++i) {
      auto& v = vertices[r.chain[i]];
      v.nf = r.chain[i];
      v.demand += r.demands[i];
    }
    vertices[r.chain.front()].ingress += r.bandwidth;
    vertices[r.chain.back()].egress += r.bandwidth;
    for (std::size_t i = 0; i + 1 < r.chain.size(); ++i) {
      auto& e = edges[{r.chain[i], r.chain[i + 1]}];
      e.from = r.chain[i];
      e.to = r.chain[i + 1];
      e.weight += r.bandwidth;
      e.sfcs.push_back(r.id);
    }
  }
  SfcGraph g;
  for (auto& [id, v] : vertices) g.vertices.push_back(v);
  for (auto& [key, e] : edges) {
    std::sort(e.sfcs.begin(), e.sfcs.end());
    g.edges.push_back(std::move(e));
  }
  nf_topological_order(g);  // throws on a cycle
  return g;
}

/// Instance count rule: max(1, ceil(C_f / instance_capacity)).
inline std::size_t instance_count(double demand, double instance_capacity) {
  if (!(instance_capacity > 0.0)) throw InvalidArgument("instance_capacity must be positive");
  auto n = static_cast<std::size_t>(std::ceil(demand / instance_capacity));
  return std::max<std::size_t>(1, n);
}

/// Expands a graph with explicit per-NF instance counts. Instances of an NF get
/// consecutive ids; NFs are laid out in topological order. Demand, ingress and
/// egress are split equally across instances and every NF-level edge becomes a
/// full bipartite block of equal weights.
inline SfcIGraph expand_with_counts(const SfcGraph& graph, const std::map<NfId, std::size_t>& counts) {
  SfcIGraph ig;
  std::map<NfId, std::vector<NodeId>> members;
  for (NfId nf : nf_topological_order(graph)) {
    const auto& v = *graph.vertex(nf);
    auto it = counts.find(nf);
    const std::size_t k = it == counts.end() ? 1 : std::max<std::size_t>(1, it->second);
    const auto kd = static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
      NodeId id = ig.nodes.size();
      ig.nodes.push_back({id, nf, v.demand / kd, v.ingress / kd, v.egress / kd});
      members[nf].push_back(id);
    }
  }
  for (const auto& e : graph.edges) {
    const auto& up = members.at(e.from);
    const auto& down = members.at(e.to);
    const double w = e.weight / static_cast<double>(up.size() * down.size());
    for (auto i : up)
      for (auto j : down) ig.edges.push_back({i, j, w});
    ig.nf_edges.push_back({e.from, e.to, e.weight});
  }
  return ig;
}

inline SfcIGraph expand_to_igraph(const SfcGraph& graph, double instance_capacity = 600.0) {
  std::map<NfId, std::size_t> counts;
  for (const auto& v : graph.vertices) counts[v.nf] = instance_count(v.demand, instance_capacity);
  return expand_with_counts(graph, counts);
}

/// Re-routes every bipartite block between adjacent NFs with a sequential
/// (northwest-corner) fill: upstream instances are drained in id order into
/// downstream instances in id order. Row and column sums are preserved and a
/// block ends up with at most (|up| + |down| - 1) nonzero edges. Blocks that are
/// already sparser than the fill would make are left untouched.
inline SfcIGraph optimize_igraph(const SfcIGraph& ig) {
  using Block = std::pair<NfId, NfId>;
  std::map<Block, std::vector<TrafficEdge>> blocks;
  std::vector<Block> block_order;
  for (const auto& e : ig.edges) {
    Block b{ig.nodes[e.from].nf, ig.nodes[e.to].nf};
    auto [it, inserted] = blocks.try_emplace(b);
    if (inserted) block_order.push_back(b);
    it->second.push_back(e);
  }

  SfcIGraph out = ig;
  out.edges.clear();
  for (const auto& b : block_order) {
    const auto& block = blocks[b];
    if (b.first == b.second) {  // malformed input; leave as is
      out.edges.insert(out.edges.end(), block.begin(), block.end());
      continue;
    }
    std::map<NodeId, double> row, col;
    std::size_t nonzero = 0;
    for (const auto& e : block) {
      row[e.from] += e.weight;
      col[e.to] += e.weight;
      if (e.weight != 0.0) ++nonzero;
    }
    std::vector<std::pair<NodeId, double>> rows(row.begin(), row.end());
    std::vector<std::pair<NodeId, double>> cols(col.begin(), col.end());
    double total = 0.0;
    for (auto& [id, w] : rows) total += w;
    const double eps = kRelTol * std::max(1.0, total);

    std::vector<TrafficEdge> filled;
    std::size_t i = 0, j = 0;
    while (i < rows.size() && j < cols.size()) {
      if (rows[i].second <= eps) {
        ++i;
        continue;
      }
      if (cols[j].second <= eps) {
        ++j;
        continue;
      }
      const bool last_row = i + 1 == rows.size();
      const bool last_col = j + 1 == cols.size();
      double amount = std::min(rows[i].second, cols[j].second);
      // Whatever is left in the final row or column goes to the last edge so
      // rounding never strands traffic.
      if (last_row && last_col) amount = std::max(rows[i].second, cols[j].second);
      filled.push_back({rows[i].first, cols[j].first, amount});
      rows[i].second -= amount;
      cols[j].second -= amount;
      if (rows[i].second <= eps) ++i;
      else if (cols[j].second <= eps) ++j;
    }
    if (filled.size() < nonzero) {
      out.edges.insert(out.edges.end(), filled.begin(), filled.end());
    } else {
      out.edges.insert(out.edges.end(), block.begin(), block.end());
    }
  }
  return out;
}

struct Diagnostic {
  enum class Kind { Cycle, SelfLoop, NegativeWeight, Conservation, UnattributedTraffic, BadNode };
  Kind kind;
  std::string message;
};

inline const char* to_string(Diagnostic::Kind k) {
  switch (k) {
    case Diagnostic::Kind::Cycle: return "cycle";
    case Diagnostic::Kind::SelfLoop: return "self-loop";
    case Diagnostic::Kind::NegativeWeight: return "negative-weight";
    case Diagnostic::Kind::Conservation: return "conservation";
    case Diagnostic::Kind::UnattributedTraffic: return "unattributed-traffic";
    case Diagnostic::Kind::BadNode: return "bad-node";
  }
  return "?";
}

/// Empty iff every SfcIGraph invariant holds.
inline std::vector<Diagnostic> validate_igraph(const SfcIGraph& ig) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> diags;
  const auto n = ig.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = ig.nodes[i];
    if (v.id != i) diags.push_back({K::BadNode, "node at index " + std::to_string(i) + " has id " + std::to_string(v.id)});
    if (v.demand < 0.0 || v.ingress < 0.0 || v.egress < 0.0)
      diags.push_back({K::NegativeWeight, "node " + std::to_string(i) + " has a negative demand or external bandwidth"});
  }

  std::map<std::pair<NfId, NfId>, double> block_sum;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (const auto& e : ig.edges) {
    const std::string tag = "edge " + std::to_string(e.from) + "->" + std::to_string(e.to);
    if (e.from >= n || e.to >= n) {
      diags.push_back({K::BadNode, tag + " references an unknown node"});
      continue;
    }
    if (e.from == e.to) {
      diags.push_back({K::SelfLoop, tag + " is a self-loop"});
      continue;
    }
    if (e.weight < 0.0) diags.push_back({K::NegativeWeight, tag + " has negative traffic"});
    arcs.emplace_back(e.from, e.to);
    block_sum[{ig.nodes[e.from].nf, ig.nodes[e.to].nf}] += e.weight;
  }
  if (!topological_order(n, arcs)) diags.push_back({K::Cycle, "instance graph contains a directed cycle"});

  std::set<std::pair<NfId, NfId>> declared;
  for (const auto& nfe : ig.nf_edges) {
    declared.insert({nfe.from, nfe.to});
    auto it = block_sum.find({nfe.from, nfe.to});
    const double got = it == block_sum.end() ? 0.0 : it->second;
    if (!approx_equal(got, nfe.weight))
      diags.push_back({K::Conservation, "block NF" + std::to_string(nfe.from) + "->NF" + std::to_string(nfe.to) +
                                            " carries " + std::to_string(got) + " but the NF edge weighs " +
                                            std::to_string(nfe.weight)});
  }
  for (const auto& [key, sum] : block_sum)
    if (!declared.count(key) && sum != 0.0)
      diags.push_back({K::UnattributedTraffic, "traffic NF" + std::to_string(key.first) + "->NF" +
                                                   std::to_string(key.second) + " has no NF-level edge"});
  return diags;
}

}  // namespace nfp
