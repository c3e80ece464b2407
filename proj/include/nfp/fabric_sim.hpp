#pragma once

// Slot-based input-queued crossbar carrying SFC traffic between line cards and
// NFP servers. Each cell re-crosses the fabric once per server change along
// its chain.
//
// Every fabric port carries a line card, and NFP server s shares port s with
// its line card, so server round trips compete with line traffic for the same
// crossbar inputs and outputs.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "nfp/error.hpp"
#include "nfp/placement.hpp"
#include "nfp/rng.hpp"
#include "nfp/sfc_model.hpp"

namespace nfp {

inline constexpr std::size_t kMaxFabricPorts = 64;

struct FabricConfig {
  std::size_t port_count = 1;  // must exceed every server index a path visits
  double load = 0.8;           // Bernoulli arrival probability per input port per slot
  std::size_t warmup_slots = 10'000;
  std::size_t measure_slots = 100'000;
  std::size_t iterations = 1;  // request/grant/accept rounds per slot
  std::uint64_t seed = 1;

  void validate() const {
    if (port_count < 1) throw InvalidArgument("need at least one port");
    if (port_count > kMaxFabricPorts) throw InvalidArgument("fabric supports at most 64 ports");
    if (!(load >= 0.0 && load <= 1.0)) throw InvalidArgument("arrival probability must lie in [0, 1]");
    if (iterations < 1) throw InvalidArgument("matcher needs at least one iteration");
  }
};

/// Servers a class of cells visits in order (consecutive entries differ) and
/// its share of the arrivals.
struct FlowPath {
  int sfc = 0;
  std::vector<ServerId> servers;
  double weight = 0.0;

  /// Fabric crossings: line card to the first server, one per server change,
  /// last server to line card. A path with no servers crosses once.
  std::size_t traversal_count() const { return servers.size() + 1; }

  /// (source port, destination port) for each crossing.
  std::vector<std::pair<std::size_t, std::size_t>> traversals(std::size_t in_port, std::size_t out_port) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t at = in_port;
    for (auto s : servers) {
      const auto port = static_cast<std::size_t>(s);
      out.emplace_back(at, port);
      at = port;
    }
    out.emplace_back(at, out_port);
    return out;
  }
};

/// Splits each request's bandwidth over the instances it may traverse and
/// collapses the result into server-level paths. Within a chain, a cell at
/// instance i of one NF continues to instance j of the next with probability
/// proportional to c_ij; entry instances share the ingress equally. Server ids
/// are renumbered densely in order of first use. Throws UnassignedNode.
inline std::vector<FlowPath> derive_paths(const std::vector<ServerId>& y, const SfcIGraph& ig,
                                          const std::vector<SfcRequest>& requests) {
  require_complete(y, ig);
  std::map<ServerId, ServerId> dense;
  auto port_of = [&](NodeId v) {
    auto [it, inserted] = dense.try_emplace(y[v], static_cast<ServerId>(dense.size()));
    return it->second;
  };
  for (NodeId v = 0; v < ig.size(); ++v) port_of(v);

  std::map<NfId, std::vector<NodeId>> members;
  for (const auto& n : ig.nodes) members[n.nf].push_back(n.id);
  std::map<std::pair<NodeId, NodeId>, double> c;
  for (const auto& e : ig.edges) c[{e.from, e.to}] += e.weight;

  std::vector<FlowPath> paths;
  for (const auto& r : requests) {
    if (r.chain.empty()) {
      paths.push_back({r.id, {}, r.bandwidth});
      continue;
    }
    struct Partial {
      NodeId at;
      std::vector<ServerId> servers;
      double prob;
    };
    std::vector<Partial> frontier;
    const auto& entry = members[r.chain.front()];
    for (auto v : entry) frontier.push_back({v, {port_of(v)}, 1.0 / static_cast<double>(entry.size())});

    for (std::size_t k = 1; k < r.chain.size(); ++k) {
      const auto& next = members[r.chain[k]];
      std::vector<double> column(next.size(), 0.0);
      for (auto i : members[r.chain[k - 1]])
        for (std::size_t j = 0; j < next.size(); ++j) {
          auto it = c.find({i, next[j]});
          if (it != c.end()) column[j] += it->second;
        }
      std::map<std::pair<NodeId, std::vector<ServerId>>, double> merged;
      for (const auto& p : frontier) {
        std::vector<double> row(next.size(), 0.0);
        double row_sum = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
          auto it = c.find({p.at, next[j]});
          row[j] = it == c.end() ? 0.0 : it->second;
          row_sum += row[j];
        }
        if (row_sum <= 0.0) {
          row = column;
          row_sum = 0.0;
          for (double w : row) row_sum += w;
        }
        if (row_sum <= 0.0) {
          std::fill(row.begin(), row.end(), 1.0);
          row_sum = static_cast<double>(row.size());
        }
        for (std::size_t j = 0; j < next.size(); ++j) {
          if (row[j] <= 0.0) continue;
          auto servers = p.servers;
          const ServerId s = port_of(next[j]);
          if (servers.back() != s) servers.push_back(s);
          merged[{next[j], std::move(servers)}] += p.prob * row[j] / row_sum;
        }
      }
      frontier.clear();
      for (auto& [key, prob] : merged) frontier.push_back({key.first, key.second, prob});
    }

    std::map<std::vector<ServerId>, double> by_route;
    for (const auto& p : frontier) by_route[p.servers] += p.prob;
    for (const auto& [route, prob] : by_route) paths.push_back({r.id, route, r.bandwidth * prob});
  }
  return paths;
}

/// Rate-weighted mean number of fabric crossings per cell.
inline double mean_traversals(const std::vector<FlowPath>& paths) {
  double w = 0.0, t = 0.0;
  for (const auto& p : paths) {
    w += p.weight;
    t += p.weight * static_cast<double>(p.traversal_count());
  }
  return w > 0.0 ? t / w : 0.0;
}

/// Iterative request/grant/accept round-robin matcher with the FIRM grant
/// pointer rule: an output whose grant is refused still moves its pointer to
/// the input it granted; an accepted grant moves it one past that input.
/// Pointers move only in the first iteration.
class RoundRobinMatcher {
 public:
  RoundRobinMatcher(std::size_t ports, std::size_t iterations)
      : ports_(ports),
        iterations_(iterations),
        grant_(ports, 0),
        accept_(ports, 0),
        in_match_(ports, -1),
        requesters_(ports, 0),
        grants_(ports, 0),
        granted_(ports, -1) {
    if (ports > kMaxFabricPorts) throw InvalidArgument("matcher supports at most 64 ports");
  }

  /// requests[i] has bit j set when input i holds a cell for output j.
  /// Returns the output matched to each input, or -1. The reference stays
  /// valid until the next call.
  const std::vector<int>& match(const std::vector<std::uint64_t>& requests) {
    std::fill(in_match_.begin(), in_match_.end(), -1);
    std::uint64_t free_out = ports_ == 64 ? ~0ULL : ((1ULL << ports_) - 1);
    std::uint64_t free_in = free_out;
    for (std::size_t it = 0; it < iterations_; ++it) {
      // Requests from unmatched inputs to unmatched outputs, seen per output.
      std::fill(requesters_.begin(), requesters_.end(), 0);
      bool any = false;
      for (std::size_t i = 0; i < ports_; ++i) {
        if (!(free_in >> i & 1)) continue;
        std::uint64_t req = requests[i] & free_out;
        any = any || req;
        while (req) {
          const auto j = static_cast<std::size_t>(std::countr_zero(req));
          req &= req - 1;
          requesters_[j] |= 1ULL << i;
        }
      }
      if (!any) break;
      std::fill(grants_.begin(), grants_.end(), 0);
      std::fill(granted_.begin(), granted_.end(), -1);
      for (std::size_t j = 0; j < ports_; ++j) {
        if (!requesters_[j]) continue;
        const auto i = next_from(requesters_[j], grant_[j]);
        granted_[j] = static_cast<int>(i);
        grants_[i] |= 1ULL << j;
      }
      for (std::size_t i = 0; i < ports_; ++i) {
        if (!grants_[i]) continue;
        const auto j = next_from(grants_[i], accept_[i]);
        in_match_[i] = static_cast<int>(j);
        free_in &= ~(1ULL << i);
        free_out &= ~(1ULL << j);
        if (it == 0) accept_[i] = (j + 1) % ports_;
      }
      if (it == 0) {
        for (std::size_t j = 0; j < ports_; ++j) {
          if (granted_[j] < 0) continue;
          const auto i = static_cast<std::size_t>(granted_[j]);
          grant_[j] = in_match_[i] == static_cast<int>(j) ? (i + 1) % ports_ : i;
        }
      }
    }
    return in_match_;
  }

  std::size_t ports() const { return ports_; }
  std::size_t grant_pointer(std::size_t output) const { return grant_[output]; }
  std::size_t accept_pointer(std::size_t input) const { return accept_[input]; }
  void set_pointers(std::vector<std::size_t> grant, std::vector<std::size_t> accept) {
    grant_ = std::move(grant);
    accept_ = std::move(accept);
  }

 private:
  /// First set bit at or after `from`, wrapping around.
  std::size_t next_from(std::uint64_t mask, std::size_t from) const {
    const std::uint64_t high = from >= 64 ? 0 : mask & (~0ULL << from);
    return static_cast<std::size_t>(std::countr_zero(high ? high : mask));
  }

  std::size_t ports_;
  std::size_t iterations_;
  std::vector<std::size_t> grant_;
  std::vector<std::size_t> accept_;
  std::vector<int> in_match_;
  std::vector<std::uint64_t> requesters_;  // per output
  std::vector<std::uint64_t> grants_;      // per input: outputs granting it
  std::vector<int> granted_;               // per output: input it granted
};

struct SimResult {
  double offered_load = 0.0;  // measured arrivals per port per slot
  double throughput = 0.0;    // measured departures per port per slot
  double mean_delay = 0.0;    // slots from arrival to departure
  std::vector<std::uint64_t> per_flow_delivered;
  std::uint64_t arrivals = 0;  // whole run, warmup included
  std::uint64_t departures = 0;
  std::uint64_t queued = 0;  // cells left in VOQs at the end
  std::uint64_t warmup_backlog = 0;  // cells queued when measurement started
  double mean_traversals = 0.0;
};

/// Per-slot snapshot for invariant checks.
struct SlotEvent {
  std::size_t slot;
  const std::vector<int>& match;  // output per input, -1 when idle
  const std::vector<std::uint64_t>& requests;
  std::uint64_t arrivals;  // cumulative
  std::uint64_t departures;
  std::uint64_t queued;
};
using SlotObserver = std::function<void(const SlotEvent&)>;

inline SimResult simulate(const FabricConfig& cfg, const std::vector<FlowPath>& paths,
                          const SlotObserver& observer = {}) {
  cfg.validate();
  const std::size_t ports = cfg.port_count;
  for (const auto& p : paths)
    for (auto s : p.servers)
      if (s < 0 || static_cast<std::size_t>(s) >= ports)
        throw InvalidArgument("path visits server " + std::to_string(s) + " but the fabric has " +
                              std::to_string(ports) + " ports");

  std::vector<double> cumulative;
  double total_weight = 0.0;
  for (const auto& p : paths) {
    total_weight += std::max(0.0, p.weight);
    cumulative.push_back(total_weight);
  }

  struct Cell {
    std::uint32_t flow;
    std::uint16_t hop;
    std::uint16_t egress;
    std::uint64_t born;
  };
  std::vector<std::deque<Cell>> voq(ports * ports);
  std::vector<std::uint64_t> occupancy(ports, 0);
  auto enqueue = [&](std::size_t in, std::size_t out, const Cell& c) {
    voq[in * ports + out].push_back(c);
    occupancy[in] |= 1ULL << out;
  };
  auto destination = [&](const Cell& c) -> std::size_t {
    const auto& srv = paths[c.flow].servers;
    return c.hop < srv.size() ? static_cast<std::size_t>(srv[c.hop]) : c.egress;
  };

  Rng rng(cfg.seed);
  RoundRobinMatcher matcher(ports, cfg.iterations);
  SimResult res;
  res.per_flow_delivered.assign(paths.size(), 0);
  res.mean_traversals = mean_traversals(paths);
  std::uint64_t measured_arrivals = 0, measured_departures = 0, queued = 0;
  double delay_sum = 0.0;
  const std::size_t total_slots = cfg.warmup_slots + cfg.measure_slots;
  std::vector<std::uint64_t> requests;
  std::vector<std::pair<std::size_t, Cell>> forwarded;

  for (std::size_t slot = 0; slot < total_slots; ++slot) {
    const bool measuring = slot >= cfg.warmup_slots;
    if (slot == cfg.warmup_slots) res.warmup_backlog = queued;
    if (total_weight > 0.0) {
      for (std::size_t in = 0; in < ports; ++in) {
        if (!rng.bernoulli(cfg.load)) continue;
        const double u = rng.uniform01() * total_weight;
        auto flow = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        flow = std::min(flow, paths.size() - 1);
        const auto egress = static_cast<std::uint16_t>(rng.uniform_int(0, static_cast<std::int64_t>(ports) - 1));
        Cell c{static_cast<std::uint32_t>(flow), 0, egress, slot};
        enqueue(in, destination(c), c);
        ++res.arrivals;
        ++queued;
        if (measuring) ++measured_arrivals;
      }
    }

    if (observer) requests = occupancy;
    const auto& match = matcher.match(occupancy);
    forwarded.clear();
    for (std::size_t in = 0; in < ports; ++in) {
      if (match[in] < 0) continue;
      const auto out = static_cast<std::size_t>(match[in]);
      auto& q = voq[in * ports + out];
      Cell c = q.front();
      q.pop_front();
      if (q.empty()) occupancy[in] &= ~(1ULL << out);
      ++c.hop;
      if (c.hop == paths[c.flow].traversal_count()) {
        ++res.departures;
        --queued;
        if (measuring) {
          ++measured_departures;
          ++res.per_flow_delivered[c.flow];
          delay_sum += static_cast<double>(slot + 1 - c.born);
        }
      } else {
        forwarded.emplace_back(out, c);
      }
    }
    // Forwarded cells become eligible in the next slot.
    for (const auto& [at, c] : forwarded) enqueue(at, destination(c), c);
    if (observer) observer({slot, match, requests, res.arrivals, res.departures, queued});
  }

  res.queued = queued;
  if (cfg.measure_slots == 0) res.warmup_backlog = queued;
  const double denom = static_cast<double>(cfg.measure_slots) * static_cast<double>(ports);
  if (cfg.measure_slots > 0) {
    res.offered_load = static_cast<double>(measured_arrivals) / denom;
    res.throughput = static_cast<double>(measured_departures) / denom;
  }
  res.mean_delay = measured_departures ? delay_sum / static_cast<double>(measured_departures) : 0.0;
  return res;
}

}  // namespace nfp
