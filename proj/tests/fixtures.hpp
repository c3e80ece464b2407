#pragma once

#include <cstddef>
#include <vector>

#include "nfp/placement.hpp"
#include "nfp/rng.hpp"
#include "nfp/sfc_model.hpp"
#include "nfp/workload.hpp"

namespace nfp::testing {

struct Arc {
  NodeId from;
  NodeId to;
  double weight;
};

/// One NF per node, so every arc is its own NF-level edge.
inline SfcIGraph make_igraph(const std::vector<double>& demands, const std::vector<Arc>& arcs) {
  SfcIGraph ig;
  for (NodeId v = 0; v < demands.size(); ++v) ig.nodes.push_back({v, static_cast<NfId>(v), demands[v], 0.0, 0.0});
  for (const auto& a : arcs) {
    ig.edges.push_back({a.from, a.to, a.weight});
    ig.nf_edges.push_back({static_cast<NfId>(a.from), static_cast<NfId>(a.to), a.weight});
  }
  return ig;
}

/// a -> b -> c with c_ab = 100, c_bc = 200.
inline SfcIGraph abc_chain(double demand) { return make_igraph({demand, demand, demand}, {{0, 1, 100}, {1, 2, 200}}); }

/// Random feasible assignment built by first fit over a shuffled node order.
inline std::vector<ServerId> random_feasible(const SfcIGraph& ig, const ServerPool& pool, Rng& rng) {
  std::vector<NodeId> order(ig.size());
  for (NodeId v = 0; v < order.size(); ++v) order[v] = v;
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  const Adjacency adj(ig);
  Placement p(ig.size());
  for (NodeId v : order) {
    ServerId chosen = p.first_empty_slot();
    const auto start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(p.server_slots())));
    for (std::size_t k = 0; k < p.server_slots(); ++k) {
      const auto s = static_cast<ServerId>((start + k) % p.server_slots());
      if (p.is_used(s) && can_host(p, v, s, adj, pool)) {
        chosen = s;
        break;
      }
    }
    p.assign(v, chosen, adj);
  }
  return p.assignment();
}

inline WorkloadParams small_params(std::uint64_t seed, std::size_t nodes) {
  WorkloadParams p;
  p.seed = seed;
  p.target_nodes = nodes;
  return p;
}

}  // namespace nfp::testing
