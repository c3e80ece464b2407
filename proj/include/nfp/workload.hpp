#pragma once

// Seeded random problem instances and their on-disk form.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nfp/baselines.hpp"
#include "nfp/error.hpp"
#include "nfp/mfmttp.hpp"
#include "nfp/placement.hpp"
#include "nfp/rng.hpp"
#include "nfp/sfc_model.hpp"

namespace nfp {

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct WorkloadParams {
  std::size_t nf_type_count = 6;
  IntRange chain_length{1, 6};
  IntRange instances_per_nf{1, 5};
  IntRange traffic{100, 600};
  IntRange demand{100, 600};
  double server_compute = 1000.0;
  double server_bandwidth = 1000.0;
  std::size_t port_limit = 32;
  std::size_t sfc_count = 2;
  std::uint64_t seed = 1;
  std::size_t target_nodes = 0;  // 0 disables node-count targeting
  std::size_t max_attempts = 2000;
  bool load_based_counts = false;  // use the max(1, ceil(C_f / capacity)) rule instead of random counts
  double instance_capacity = 600.0;
  bool solvable_only = true;  // redraw until both greedy placements are feasible

  void validate() const {
    auto positive = [](const IntRange& r, const char* name) {
      if (r.lo < 1 || r.hi < r.lo) throw InvalidArgument(std::string("invalid range for ") + name);
    };
    positive(chain_length, "chain length");
    positive(instances_per_nf, "instances per NF");
    positive(traffic, "traffic");
    positive(demand, "demand");
    if (nf_type_count < 1) throw InvalidArgument("need at least one NF type");
    if (!(server_compute > 0.0) || !(server_bandwidth > 0.0)) throw InvalidArgument("server resources must be positive");
    if (port_limit < 1) throw InvalidArgument("port limit must be at least 1");
    if (sfc_count < 1) throw InvalidArgument("need at least one SFC");
    if (max_attempts < 1) throw InvalidArgument("need at least one attempt");
    if (!(instance_capacity > 0.0)) throw InvalidArgument("instance capacity must be positive");
  }

  ServerPool pool() const { return {server_compute, server_bandwidth, port_limit, 1.0}; }

  friend bool operator==(const WorkloadParams&, const WorkloadParams&) = default;
};

struct Instance {
  std::string name;
  std::optional<WorkloadParams> params;
  std::vector<NfType> nf_types;
  std::vector<SfcRequest> requests;
  SfcGraph graph;
  SfcIGraph igraph;

  ServerPool pool() const { return params ? params->pool() : ServerPool{}; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

namespace detail {

enum Stream : std::uint64_t { kChains = 1, kCounts = 2, kTraffic = 3, kDemands = 4 };

/// Draws `count` integers in [lo, hi] that sum to `total`; requires
/// count * lo <= total <= count * hi.
inline std::vector<std::int64_t> bounded_sum(Rng& rng, std::size_t count, std::int64_t total, std::int64_t lo,
                                             std::int64_t hi) {
  std::vector<std::int64_t> out;
  std::int64_t remaining = total;
  for (std::size_t k = 0; k < count; ++k) {
    const auto rest = static_cast<std::int64_t>(count - k - 1);
    const auto a = std::max(lo, remaining - hi * rest);
    const auto b = std::min(hi, remaining - lo * rest);
    const auto x = rng.uniform_int(a, b);
    out.push_back(x);
    remaining -= x;
  }
  for (std::size_t i = out.size(); i > 1; --i)
    std::swap(out[i - 1], out[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  return out;
}

/// Monotone staircase from (0,0) to (a-1,b-1): a + b - 1 cells covering every row and column.
inline std::vector<std::pair<std::size_t, std::size_t>> staircase(Rng& rng, std::size_t a, std::size_t b) {
  std::vector<std::pair<std::size_t, std::size_t>> cells{{0, 0}};
  std::size_t i = 0, j = 0;
  while (i + 1 < a || j + 1 < b) {
    const bool down = j + 1 == b || (i + 1 < a && rng.uniform_int(0, 1) == 0);
    if (down) ++i;
    else ++j;
    cells.emplace_back(i, j);
  }
  return cells;
}

struct Attempt {
  std::vector<SfcRequest> requests;
  SfcGraph graph;
  SfcIGraph igraph;
};

/// One generation attempt; nullopt when the draw cannot satisfy the traffic
/// range or the node-count target.
inline std::optional<Attempt> try_generate(const WorkloadParams& prm, std::uint64_t attempt, bool enforce_target) {
  Attempt out;
  const auto T = static_cast<std::int64_t>(prm.nf_type_count);

  // Chains: a random global order of NF types keeps the merged graph acyclic.
  {
    Rng rng = Rng::derive(prm.seed, {attempt, kChains});
    std::vector<NfId> order(prm.nf_type_count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NfId>(i);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    for (std::size_t c = 0; c < prm.sfc_count; ++c) {
      const auto len = rng.uniform_int(std::min(prm.chain_length.lo, T), std::min(prm.chain_length.hi, T));
      std::vector<std::size_t> pos(order.size());
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
      for (std::int64_t i = 0; i < len; ++i) {
        const auto pick = static_cast<std::size_t>(rng.uniform_int(i, T - 1));
        std::swap(pos[static_cast<std::size_t>(i)], pos[pick]);
      }
      pos.resize(static_cast<std::size_t>(len));
      std::sort(pos.begin(), pos.end());
      SfcRequest r;
      r.id = static_cast<int>(c);
      for (auto p : pos) r.chain.push_back(order[p]);
      r.bandwidth = static_cast<double>(rng.uniform_int(prm.traffic.lo, prm.traffic.hi));
      for (std::size_t i = 0; i < r.chain.size(); ++i)
        r.demands.push_back(static_cast<double>(rng.uniform_int(prm.demand.lo, prm.demand.hi)));
      out.requests.push_back(std::move(r));
    }
  }
  out.graph = build_sfc_graph(out.requests);

  // Instance counts, optionally steered onto the node-count target.
  std::map<NfId, std::size_t> counts;
  {
    Rng rng = Rng::derive(prm.seed, {attempt, kCounts});
    for (const auto& v : out.graph.vertices)
      counts[v.nf] = prm.load_based_counts
                         ? instance_count(v.demand, prm.instance_capacity)
                         : static_cast<std::size_t>(rng.uniform_int(prm.instances_per_nf.lo, prm.instances_per_nf.hi));
    if (enforce_target && prm.target_nodes > 0) {
      const auto t = counts.size();
      const auto lo = static_cast<std::size_t>(prm.instances_per_nf.lo);
      const auto hi = static_cast<std::size_t>(prm.instances_per_nf.hi);
      if (prm.target_nodes < t * lo || prm.target_nodes > t * hi) return std::nullopt;
      std::vector<NfId> keys;
      for (auto& [nf, k] : counts) keys.push_back(nf);
      std::size_t total = 0;
      for (auto& [nf, k] : counts) total += k;
      while (total != prm.target_nodes) {
        auto& k = counts[keys[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(keys.size()) - 1))]];
        if (total < prm.target_nodes && k < hi) {
          ++k;
          ++total;
        } else if (total > prm.target_nodes && k > lo) {
          --k;
          --total;
        }
      }
    }
  }
  out.igraph = expand_with_counts(out.graph, counts);

  // Instance-level traffic: each NF edge block gets a staircase of integer
  // weights drawn in the traffic range and summing exactly to the NF edge.
  {
    Rng rng = Rng::derive(prm.seed, {attempt, kTraffic});
    std::vector<TrafficEdge> edges;
    for (const auto& nfe : out.igraph.nf_edges) {
      const auto up = out.igraph.instances_of(nfe.from);
      const auto down = out.igraph.instances_of(nfe.to);
      const auto total = static_cast<std::int64_t>(nfe.weight);
      const auto cells = static_cast<std::int64_t>(up.size() * down.size());
      const auto need = (total + prm.traffic.hi - 1) / prm.traffic.hi;
      const auto room = std::min(cells, total / prm.traffic.lo);
      if (need > room) return std::nullopt;
      auto pattern = staircase(rng, up.size(), down.size());
      auto count = std::clamp(static_cast<std::int64_t>(pattern.size()), need, room);
      // Extra cells beyond the staircase, taken in a random order.
      if (count > static_cast<std::int64_t>(pattern.size())) {
        std::vector<std::pair<std::size_t, std::size_t>> rest;
        for (std::size_t i = 0; i < up.size(); ++i)
          for (std::size_t j = 0; j < down.size(); ++j)
            if (std::find(pattern.begin(), pattern.end(), std::pair{i, j}) == pattern.end()) rest.emplace_back(i, j);
        for (std::size_t i = 0; static_cast<std::int64_t>(pattern.size()) < count; ++i) {
          const auto pick = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                                     static_cast<std::int64_t>(rest.size()) - 1));
          std::swap(rest[i], rest[pick]);
          pattern.push_back(rest[i]);
        }
      }
      pattern.resize(static_cast<std::size_t>(count));
      const auto weights = bounded_sum(rng, pattern.size(), total, prm.traffic.lo, prm.traffic.hi);
      for (std::size_t k = 0; k < pattern.size(); ++k)
        edges.push_back({up[pattern[k].first], down[pattern[k].second], static_cast<double>(weights[k])});
    }
    std::sort(edges.begin(), edges.end(),
              [](const TrafficEdge& a, const TrafficEdge& b) { return std::pair{a.from, a.to} < std::pair{b.from, b.to}; });
    out.igraph.edges = std::move(edges);
  }

  {
    Rng rng = Rng::derive(prm.seed, {attempt, kDemands});
    for (auto& node : out.igraph.nodes)
      node.demand = static_cast<double>(rng.uniform_int(prm.demand.lo, prm.demand.hi));
  }

  if (prm.solvable_only) {
    try {
      const auto pool = prm.pool();
      initial_deployment(out.igraph, pool);
      gff_solve(out.igraph, pool);
    } catch (const Infeasible&) {
      return std::nullopt;
    }
  }
  return out;
}

}  // namespace detail

/// Builds a random instance. With `target_nodes` set, attempts are redrawn
/// until the instance graph has exactly that many NFIs; after `max_attempts`
/// the closest valid draw is kept. Attempts that would put an instance-level
/// traffic value outside the traffic range are rejected, as are (with
/// `solvable_only`) draws on which the greedy deployments find no feasible
/// placement.
inline Instance generate_instance(const WorkloadParams& params) {
  params.validate();
  std::optional<detail::Attempt> nearest;
  std::size_t nearest_gap = SIZE_MAX;
  for (std::size_t a = 0; a < params.max_attempts; ++a) {
    if (auto got = detail::try_generate(params, a, true)) {
      nearest = std::move(got);
      nearest_gap = 0;
      break;
    }
  }
  for (std::size_t a = 0; !nearest && a < params.max_attempts; ++a) {
    if (auto got = detail::try_generate(params, a, false)) {
      const auto n = got->igraph.size();
      const auto gap = n > params.target_nodes ? n - params.target_nodes : params.target_nodes - n;
      if (gap < nearest_gap) {
        nearest_gap = gap;
        nearest = std::move(got);
      }
    }
  }
  if (!nearest) throw Error("could not draw an instance within the traffic range; widen the ranges or add attempts");

  Instance inst;
  inst.name = "seed" + std::to_string(params.seed);
  inst.params = params;
  for (std::size_t i = 0; i < params.nf_type_count; ++i)
    inst.nf_types.push_back({static_cast<NfId>(i), "NF" + std::to_string(i)});
  inst.requests = std::move(nearest->requests);
  inst.graph = std::move(nearest->graph);
  inst.igraph = std::move(nearest->igraph);
  return inst;
}

// ---------------------------------------------------------------------------
// Instance files

inline constexpr int kInstanceFormatVersion = 1;

inline nlohmann::json to_json(const WorkloadParams& p) {
  return {{"nf_type_count", p.nf_type_count},
          {"chain_length", {p.chain_length.lo, p.chain_length.hi}},
          {"instances_per_nf", {p.instances_per_nf.lo, p.instances_per_nf.hi}},
          {"traffic", {p.traffic.lo, p.traffic.hi}},
          {"demand", {p.demand.lo, p.demand.hi}},
          {"server_compute", p.server_compute},
          {"server_bandwidth", p.server_bandwidth},
          {"port_limit", p.port_limit},
          {"sfc_count", p.sfc_count},
          {"seed", p.seed},
          {"target_nodes", p.target_nodes},
          {"max_attempts", p.max_attempts},
          {"load_based_counts", p.load_based_counts},
          {"instance_capacity", p.instance_capacity},
          {"solvable_only", p.solvable_only}};
}

inline WorkloadParams params_from_json(const nlohmann::json& j) {
  auto range = [&](const char* key) { return IntRange{j.at(key).at(0).get<std::int64_t>(), j.at(key).at(1).get<std::int64_t>()}; };
  WorkloadParams p;
  p.nf_type_count = j.at("nf_type_count").get<std::size_t>();
  p.chain_length = range("chain_length");
  p.instances_per_nf = range("instances_per_nf");
  p.traffic = range("traffic");
  p.demand = range("demand");
  p.server_compute = j.at("server_compute").get<double>();
  p.server_bandwidth = j.at("server_bandwidth").get<double>();
  p.port_limit = j.at("port_limit").get<std::size_t>();
  p.sfc_count = j.at("sfc_count").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.target_nodes = j.at("target_nodes").get<std::size_t>();
  p.max_attempts = j.at("max_attempts").get<std::size_t>();
  p.load_based_counts = j.at("load_based_counts").get<bool>();
  p.instance_capacity = j.at("instance_capacity").get<double>();
  p.solvable_only = j.at("solvable_only").get<bool>();
  return p;
}

inline nlohmann::json to_json(const Instance& inst) {
  using nlohmann::json;
  json doc;
  doc["format"] = "nfp-instance";
  doc["version"] = kInstanceFormatVersion;
  doc["name"] = inst.name;
  if (inst.params) doc["params"] = to_json(*inst.params);
  doc["nf_types"] = json::array();
  for (const auto& t : inst.nf_types) doc["nf_types"].push_back({{"id", t.id}, {"name", t.name}});
  doc["requests"] = json::array();
  for (const auto& r : inst.requests)
    doc["requests"].push_back({{"id", r.id}, {"chain", r.chain}, {"bandwidth", r.bandwidth}, {"demands", r.demands}});
  json g;
  g["vertices"] = json::array();
  for (const auto& v : inst.graph.vertices)
    g["vertices"].push_back({{"nf", v.nf}, {"demand", v.demand}, {"ingress", v.ingress}, {"egress", v.egress}});
  g["edges"] = json::array();
  for (const auto& e : inst.graph.edges)
    g["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}, {"sfcs", e.sfcs}});
  doc["graph"] = std::move(g);
  json ig;
  ig["nodes"] = json::array();
  for (const auto& n : inst.igraph.nodes)
    ig["nodes"].push_back({{"id", n.id}, {"nf", n.nf}, {"demand", n.demand}, {"ingress", n.ingress}, {"egress", n.egress}});
  ig["edges"] = json::array();
  for (const auto& e : inst.igraph.edges) ig["edges"].push_back({e.from, e.to, e.weight});
  ig["nf_edges"] = json::array();
  for (const auto& e : inst.igraph.nf_edges) ig["nf_edges"].push_back({e.from, e.to, e.weight});
  doc["igraph"] = std::move(ig);
  return doc;
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  if (doc.value("format", std::string{}) != "nfp-instance") throw VersionMismatch("not an nfp instance document");
  const int version = doc.at("version").get<int>();
  if (version != kInstanceFormatVersion)
    throw VersionMismatch("instance format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kInstanceFormatVersion) + ")");
  Instance inst;
  inst.name = doc.at("name").get<std::string>();
  if (doc.contains("params")) inst.params = params_from_json(doc.at("params"));
  for (const auto& t : doc.at("nf_types")) inst.nf_types.push_back({t.at("id").get<NfId>(), t.at("name").get<std::string>()});
  for (const auto& r : doc.at("requests"))
    inst.requests.push_back({r.at("id").get<int>(), r.at("chain").get<std::vector<NfId>>(), r.at("bandwidth").get<double>(),
                             r.at("demands").get<std::vector<double>>()});
  const auto& g = doc.at("graph");
  for (const auto& v : g.at("vertices"))
    inst.graph.vertices.push_back({v.at("nf").get<NfId>(), v.at("demand").get<double>(), v.at("ingress").get<double>(),
                                   v.at("egress").get<double>()});
  for (const auto& e : g.at("edges"))
    inst.graph.edges.push_back({e.at("from").get<NfId>(), e.at("to").get<NfId>(), e.at("weight").get<double>(),
                                e.at("sfcs").get<std::vector<int>>()});
  const auto& ig = doc.at("igraph");
  for (const auto& n : ig.at("nodes"))
    inst.igraph.nodes.push_back({n.at("id").get<NodeId>(), n.at("nf").get<NfId>(), n.at("demand").get<double>(),
                                 n.at("ingress").get<double>(), n.at("egress").get<double>()});
  for (const auto& e : ig.at("edges"))
    inst.igraph.edges.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
  for (const auto& e : ig.at("nf_edges"))
    inst.igraph.nf_edges.push_back({e.at(0).get<NfId>(), e.at(1).get<NfId>(), e.at(2).get<double>()});
  return inst;
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline std::string serialize_instance(const Instance& inst) { return to_json(inst).dump(2) + "\n"; }

inline Instance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte is one past the offending character
    auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(e.what(), line, col);
  }
  try {
    return instance_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what(), 0, 0);
  }
}

inline void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize_instance(inst);
  if (!out) throw Error("write failed for " + path);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

}  // namespace nfp
