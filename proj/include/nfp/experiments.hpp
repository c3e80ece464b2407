#pragma once

// Seed sweeps behind the comparison and figure-reproduction commands.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "nfp/baselines.hpp"
#include "nfp/fabric_sim.hpp"
#include "nfp/mfmttp.hpp"
#include "nfp/workload.hpp"

namespace nfp {

/// Worker count from NFP_WORKERS, else the hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("NFP_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(i) for i in [0, count) on `workers` threads. Jobs write their own
/// result slots, so output order does not depend on scheduling. The first
/// exception is rethrown after all workers stop.
template <class Job>
void run_parallel(std::size_t count, std::size_t workers, Job&& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

struct SweepOptions {
  std::vector<std::size_t> node_counts{10, 15, 20, 25, 30};
  std::size_t seeds = 100;
  std::uint64_t first_seed = 1;
  WorkloadParams workload{};
  std::size_t workers = default_workers();
};

inline WorkloadParams sweep_params(const SweepOptions& o, std::size_t nodes, std::uint64_t seed) {
  WorkloadParams p = o.workload;
  p.target_nodes = nodes;
  p.seed = seed;
  return p;
}

/// One (node count, seed) point comparing MFMTTP against GFF.
struct SolverRow {
  std::size_t nodes = 0;
  std::uint64_t seed = 0;
  std::size_t actual_nodes = 0;
  double cost_mfmttp = 0.0;
  double cost_gff = 0.0;
  double reduction = 0.0;  // (gff - mfmttp) / gff, 0 when gff is 0
  std::size_t times = 0;
  std::size_t servers_mfmttp = 0;
  std::size_t servers_gff = 0;
  double seconds_mfmttp = 0.0;
};

inline SolverRow solver_row(const Instance& inst, std::size_t nodes, std::uint64_t seed) {
  const auto pool = inst.pool();
  SolverRow r;
  r.nodes = nodes;
  r.seed = seed;
  r.actual_nodes = inst.igraph.size();
  const auto m = solve(inst.igraph, pool);
  const auto g = gff_solve(inst.igraph, pool);
  r.cost_mfmttp = m.stats.final_cost;
  r.cost_gff = evaluate_cost(g, inst.igraph, pool).total_cost;
  r.reduction = r.cost_gff > 0.0 ? (r.cost_gff - r.cost_mfmttp) / r.cost_gff : 0.0;
  r.times = m.stats.times;
  r.servers_mfmttp = m.placement.used_servers();
  r.servers_gff = g.used_servers();
  r.seconds_mfmttp = m.stats.wall_seconds;
  return r;
}

/// Inter-traffic and iteration counts for every (node count, seed).
inline std::vector<SolverRow> run_solver_sweep(const SweepOptions& o) {
  std::vector<SolverRow> rows(o.node_counts.size() * o.seeds);
  run_parallel(rows.size(), o.workers, [&](std::size_t i) {
    const auto nodes = o.node_counts[i / o.seeds];
    const auto seed = o.first_seed + i % o.seeds;
    rows[i] = solver_row(generate_instance(sweep_params(o, nodes, seed)), nodes, seed);
  });
  return rows;
}

struct ThroughputOptions {
  SweepOptions sweep;
  std::size_t port_count = 0;  // 0: just enough ports for the larger placement
  double load = 0.8;
  std::size_t warmup_slots = 10'000;
  std::size_t measure_slots = 100'000;
  std::size_t iterations = 1;
};

struct ThroughputRow {
  std::size_t nodes = 0;
  std::uint64_t seed = 0;
  double throughput_mfmttp = 0.0;
  double throughput_gff = 0.0;
  double delay_mfmttp = 0.0;
  double delay_gff = 0.0;
  double traversals_mfmttp = 0.0;
  double traversals_gff = 0.0;
};

/// Both placements of the same instance run on the same fabric size with the
/// same arrival seed.
inline ThroughputRow throughput_row(const Instance& inst, const ThroughputOptions& o, std::size_t nodes,
                                    std::uint64_t seed) {
  const auto pool = inst.pool();
  const auto m = solve(inst.igraph, pool).placement;
  const auto g = gff_solve(inst.igraph, pool);
  const auto pm = derive_paths(m.assignment(), inst.igraph, inst.requests);
  const auto pg = derive_paths(g.assignment(), inst.igraph, inst.requests);
  FabricConfig cfg;
  cfg.port_count = o.port_count ? o.port_count : std::max<std::size_t>(1, std::max(m.used_servers(), g.used_servers()));
  cfg.load = o.load;
  cfg.warmup_slots = o.warmup_slots;
  cfg.measure_slots = o.measure_slots;
  cfg.iterations = o.iterations;
  cfg.seed = mix64(seed ^ 0x5bd1e995ULL);
  const auto rm = simulate(cfg, pm);
  const auto rg = simulate(cfg, pg);
  return {nodes, seed, rm.throughput, rg.throughput, rm.mean_delay, rg.mean_delay, rm.mean_traversals, rg.mean_traversals};
}

inline std::vector<ThroughputRow> run_throughput_sweep(const ThroughputOptions& o) {
  const auto& s = o.sweep;
  std::vector<ThroughputRow> rows(s.node_counts.size() * s.seeds);
  run_parallel(rows.size(), s.workers, [&](std::size_t i) {
    const auto nodes = s.node_counts[i / s.seeds];
    const auto seed = s.first_seed + i % s.seeds;
    rows[i] = throughput_row(generate_instance(sweep_params(s, nodes, seed)), o, nodes, seed);
  });
  return rows;
}

/// Exact optimum against both heuristics on one small instance.
struct CompareRow {
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  double cost_exact = 0.0;
  double cost_mfmttp = 0.0;
  double cost_gff = 0.0;
  double gap_mfmttp = 0.0;  // cost / exact, 1 when exact is 0 and the heuristic also is
  double gap_gff = 0.0;
  std::uint64_t partitions = 0;
};

inline double gap_ratio(double heuristic, double exact) {
  if (exact > 0.0) return heuristic / exact;
  return heuristic > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

inline CompareRow compare_row(const Instance& inst, std::uint64_t seed, std::size_t exact_limit) {
  const auto pool = inst.pool();
  CompareRow r;
  r.seed = seed;
  r.nodes = inst.igraph.size();
  const auto ex = exact_solve(inst.igraph, pool, exact_limit);
  r.cost_exact = ex.cost;
  r.partitions = ex.enumerated;
  r.cost_mfmttp = solve(inst.igraph, pool).stats.final_cost;
  r.cost_gff = evaluate_cost(gff_solve(inst.igraph, pool), inst.igraph, pool).total_cost;
  r.gap_mfmttp = gap_ratio(r.cost_mfmttp, r.cost_exact);
  r.gap_gff = gap_ratio(r.cost_gff, r.cost_exact);
  return r;
}

}  // namespace nfp
