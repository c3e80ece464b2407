#pragma once

// Comparison solvers: first-fit (GFF) and an exhaustive set-partition oracle
// for the 0-1 placement program on small instances.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nfp/error.hpp"
#include "nfp/mfmttp.hpp"
#include "nfp/placement.hpp"
#include "nfp/sfc_model.hpp"

namespace nfp {

enum class GffOrder { Ascending, Dfs };

/// Each node, in ascending id (or DFS order), goes to the lowest-indexed open
/// server that still satisfies compute and link limits; a new server opens when none does.
inline Placement gff_solve(const SfcIGraph& ig, const ServerPool& pool, GffOrder order = GffOrder::Ascending) {
  pool.validate();
  const Adjacency adj(ig);
  std::vector<NodeId> visit;
  if (order == GffOrder::Dfs) {
    visit = dfs_order(ig);
  } else {
    for (NodeId v = 0; v < ig.size(); ++v) visit.push_back(v);
  }
  Placement p(ig.size());
  for (NodeId v : visit) {
    ServerId chosen = kUnassigned;
    for (std::size_t s = 0; s < p.server_slots(); ++s) {
      if (p.is_used(static_cast<ServerId>(s)) && can_host(p, v, static_cast<ServerId>(s), adj, pool)) {
        chosen = static_cast<ServerId>(s);
        break;
      }
    }
    if (chosen == kUnassigned) {
      if (p.used_servers() >= pool.port_limit)
        throw Infeasible("GFF: NFI " + std::to_string(v) + " fits no server within the port limit");
      chosen = p.first_empty_slot();
      if (!can_host(p, v, chosen, adj, pool))
        throw Infeasible("GFF: NFI " + std::to_string(v) + " does not fit on an empty server");
    }
    p.assign(v, chosen, adj);
  }
  return p;
}

struct ExactResult {
  std::vector<ServerId> assignment;  // restricted growth string of the optimum
  double cost = 0.0;
  std::size_t servers = 0;
  std::uint64_t enumerated = 0;  // partitions into at most P blocks
  std::uint64_t feasible = 0;
};

inline constexpr std::size_t kDefaultExactLimit = 10;

/// Enumerates every set partition of the nodes into at most P blocks as a
/// restricted growth string in lexicographic order and keeps the cheapest one
/// that fits compute and link limits. Ties go to fewer servers, then to the
/// lexicographically first string.
inline ExactResult exact_solve(const SfcIGraph& ig, const ServerPool& pool,
                               std::size_t node_limit = kDefaultExactLimit) {
  pool.validate();
  const std::size_t n = ig.size();
  if (n > node_limit)
    throw TooLarge("exact solver limited to " + std::to_string(node_limit) + " NFIs, instance has " +
                   std::to_string(n));
  ExactResult best;
  if (n == 0) {
    best.enumerated = best.feasible = 1;
    return best;
  }

  const auto max_blocks = static_cast<ServerId>(std::min(n, pool.port_limit));
  std::vector<ServerId> rgs(n, 0);
  std::vector<ServerId> prefix_max(n, 0);  // max of rgs[0..i]
  bool found = false;

  auto evaluate = [&] {
    ++best.enumerated;
    const std::size_t blocks = static_cast<std::size_t>(prefix_max[n - 1]) + 1;
    std::vector<double> compute(blocks, 0.0), link(blocks, 0.0);
    for (NodeId v = 0; v < n; ++v) {
      compute[rgs[v]] += ig.nodes[v].demand;
      link[rgs[v]] += ig.nodes[v].ingress + ig.nodes[v].egress;
    }
    double cost = 0.0;
    for (const auto& e : ig.edges) {
      const ServerId a = rgs[e.from], b = rgs[e.to];
      if (a == b) continue;
      link[a] += e.weight;
      link[b] += e.weight;
      cost += e.weight;
    }
    for (std::size_t s = 0; s < blocks; ++s)
      if (!fits(compute[s], pool.compute_capacity) || !fits(link[s], pool.link_bandwidth)) return;
    ++best.feasible;
    cost *= pool.unit_link_cost;
    const bool better = !found || cost < best.cost - kRelTol * std::max(1.0, best.cost) ||
                        (approx_equal(cost, best.cost) && blocks < best.servers);
    if (better) {
      found = true;
      best.cost = cost;
      best.servers = blocks;
      best.assignment = rgs;
    }
  };

  // Odometer over restricted growth strings: rgs[0] = 0 and
  // rgs[i] <= prefix_max[i - 1] + 1, capped at max_blocks - 1.
  for (;;) {
    for (std::size_t i = 1; i < n; ++i) prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    evaluate();
    std::size_t i = n - 1;
    while (i > 0) {
      const ServerId cap = std::min<ServerId>(prefix_max[i - 1] + 1, max_blocks - 1);
      if (rgs[i] < cap) break;
      rgs[i] = 0;
      --i;
    }
    if (i == 0) break;
    ++rgs[i];
  }
  if (!found) throw Infeasible("no partition satisfies the capacity and bandwidth constraints");
  return best;
}

}  // namespace nfp
