// nfp: generate instances, solve them, compare solvers and run the sweeps.
//
// Exit codes: 0 success, 1 usage, 2 infeasible, 3 validation failure.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#ifdef NFP_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif
#include "nfp/baselines.hpp"
#include "nfp/experiments.hpp"
#include "nfp/io.hpp"
#include "nfp/mfmttp.hpp"
#include "nfp/workload.hpp"

#ifndef NFP_VERSION
#define NFP_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace nfp;

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kInvalid = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

/// Writes `text` to `path` ("-" is stdout) and records its digest.
struct Outputs {
  json digests = json::object();
  void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
      std::cout << text;
      return;
    }
    write_text(path, text);
    digests[path] = "sha256:" + sha256_hex(text);
  }
};

/// Manifest next to the first written file: <file>.manifest.json.
void write_manifest(const std::string& anchor, const std::string& command, const json& params,
                    const std::vector<std::uint64_t>& seeds, const Outputs& outs) {
  if (anchor.empty() || anchor == "-") return;
  json m;
  m["command"] = command;
  m["params"] = params;
  m["seeds"] = seeds;
  m["version"] = NFP_VERSION;
  m["outputs"] = outs.digests;
  write_text(anchor + ".manifest.json", m.dump(2) + "\n");
}

IntRange to_range(const std::vector<std::int64_t>& v, const char* name) {
  if (v.size() != 2 || v[0] < 1 || v[1] < v[0])
    throw UsageError(std::string("--") + name + " expects LO,HI with 1 <= LO <= HI");
  return {v[0], v[1]};
}

std::vector<std::int64_t> from_range(const IntRange& r) { return {r.lo, r.hi}; }

/// Workload flags shared by generate, compare and sweep.
struct WorkloadFlags {
  WorkloadParams p;
  std::vector<std::int64_t> chain = from_range(p.chain_length);
  std::vector<std::int64_t> instances = from_range(p.instances_per_nf);
  std::vector<std::int64_t> traffic = from_range(p.traffic);
  std::vector<std::int64_t> demand = from_range(p.demand);

  void add_to(CLI::App* app) {
    app->add_option("--nf-types", p.nf_type_count, "number of NF types")->capture_default_str();
    app->add_option("--sfcs", p.sfc_count, "SFC requests per instance")->capture_default_str();
    app->add_option("--chain-length", chain, "LO,HI chain length")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--instances", instances, "LO,HI instances per NF")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--traffic", traffic, "LO,HI traffic range")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--demand", demand, "LO,HI compute demand range")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--compute", p.server_compute, "server compute capacity")->capture_default_str();
    app->add_option("--bandwidth", p.server_bandwidth, "server link bandwidth")->capture_default_str();
    app->add_option("--ports", p.port_limit, "switch ports (max servers)")->capture_default_str();
    app->add_flag("--load-based-counts", p.load_based_counts, "instance counts from NF load instead of random");
    app->add_flag("!--allow-infeasible", p.solvable_only, "keep draws the greedy deployments cannot place");
  }

  WorkloadParams resolve() {
    p.chain_length = to_range(chain, "chain-length");
    p.instances_per_nf = to_range(instances, "instances");
    p.traffic = to_range(traffic, "traffic");
    p.demand = to_range(demand, "demand");
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

Instance load_valid_instance(const std::string& path) {
  auto inst = load_instance(path);
  const auto diags = validate_igraph(inst.igraph);
  if (!diags.empty()) {
    std::string msg = path + " failed validation:";
    for (const auto& d : diags) msg += std::string("\n  ") + to_string(d.kind) + ": " + d.message;
    throw ParseError(msg, 0, 0);
  }
  return inst;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
  return out + "\n";
}

std::string num(double v) { return csv_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

// ---------------------------------------------------------------------------

int cmd_generate(WorkloadFlags& wf, std::uint64_t seed, std::size_t nodes, const std::string& out) {
  auto p = wf.resolve();
  p.seed = seed;
  p.target_nodes = nodes;
  const auto inst = generate_instance(p);
  if (nodes && inst.igraph.size() != nodes)
    std::cerr << "note: no draw hit " << nodes << " NFIs; kept one with " << inst.igraph.size() << "\n";
  Outputs o;
  o.emit(out, serialize_instance(inst));
  write_manifest(out, "generate", to_json(p), {seed}, o);
  return kOk;
}

struct SolveFlags {
  std::string instance;
  std::string algorithm = "mfmttp";
  std::string out;
  std::string costs;
  std::string gff_order = "ascending";
  std::size_t exact_limit = kDefaultExactLimit;
  bool trace = false;
};

int cmd_solve(const SolveFlags& f) {
  const auto inst = load_valid_instance(f.instance);
  const auto pool = inst.pool();
  std::vector<ServerId> y;
  std::size_t times = 1;
  const auto t0 = std::chrono::steady_clock::now();
  if (f.algorithm == "mfmttp") {
    TraceSink sink;
    if (f.trace)
      sink = [](const TraceEvent& e) {
        std::cerr << "pass=" << e.pass << " node=" << e.move.node << " from=" << e.move.from << " to=" << e.move.to
                  << " rd=" << csv_number(e.move.rd) << " committed=" << (e.committed ? 1 : 0) << "\n";
      };
    auto r = solve(inst.igraph, pool, sink);
    y = r.placement.assignment();
    times = r.stats.times;
  } else if (f.algorithm == "gff") {
    y = gff_solve(inst.igraph, pool, f.gff_order == "dfs" ? GffOrder::Dfs : GffOrder::Ascending).assignment();
  } else {
    y = exact_solve(inst.igraph, pool, f.exact_limit).assignment;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto report = evaluate_cost(y, inst.igraph, pool);
  const auto feas = is_feasible(y, inst.igraph, pool);
  if (!feas) throw Infeasible(feas.violations.front().message);

  Outputs o;
  if (!f.out.empty()) o.emit(f.out, serialize_placement(inst.name, y));
  if (!f.costs.empty()) o.emit(f.costs, cost_report_csv(report));
  std::cout << "instance,algorithm,nodes,cost,servers,times,wall_seconds\n"
            << join_row({inst.name, f.algorithm, num(inst.igraph.size()), num(report.total_cost),
                         num(used_server_count(y)), num(times), num(secs)});
  json params{{"instance", f.instance},       {"instance_sha256", sha256_hex(read_text(f.instance))},
              {"algorithm", f.algorithm},     {"gff_order", f.gff_order},
              {"exact_limit", f.exact_limit}};
  write_manifest(!f.out.empty() ? f.out : f.costs, "solve", params, {}, o);
  return kOk;
}

const char* kCompareHeader = "seed,n,cost_exact,cost_mfmttp,cost_gff,gap_mfmttp,gap_gff,partitions\n";

std::string compare_line(const CompareRow& r) {
  return join_row({num(r.seed), num(r.nodes), num(r.cost_exact), num(r.cost_mfmttp), num(r.cost_gff),
                   num(r.gap_mfmttp), num(r.gap_gff), num(r.partitions)});
}

int cmd_compare(WorkloadFlags& wf, std::uint64_t first, std::size_t seeds, std::size_t nodes, std::size_t limit,
                std::size_t workers, const std::string& out) {
  auto p = wf.resolve();
  std::vector<CompareRow> rows(seeds);
  run_parallel(seeds, workers, [&](std::size_t i) {
    auto q = p;
    q.seed = first + i;
    q.target_nodes = nodes;
    rows[i] = compare_row(generate_instance(q), q.seed, limit);
  });
  std::string text = kCompareHeader;
  for (const auto& r : rows) text += compare_line(r);
  Outputs o;
  o.emit(out, text);
  auto params = to_json(p);
  params["nodes"] = nodes;
  params["exact_limit"] = limit;
  write_manifest(out, "compare", params, seed_list(first, seeds), o);
  return kOk;
}

int cmd_exact_check(const std::string& path, std::size_t limit) {
  const auto inst = load_valid_instance(path);
  const std::uint64_t seed = inst.params ? inst.params->seed : 0;
  const auto r = compare_row(inst, seed, limit);
  std::cout << kCompareHeader << compare_line(r);
  const bool dominated = r.cost_exact <= r.cost_mfmttp + 1e-9 && r.cost_exact <= r.cost_gff + 1e-9;
  if (!dominated) {
    std::cerr << "exact optimum exceeds a heuristic cost\n";
    return kInvalid;
  }
  return kOk;
}

struct SweepFlags {
  int figure = 7;
  std::size_t seeds = 100;
  std::uint64_t first_seed = 1;
  std::vector<std::size_t> nodes{10, 15, 20, 25, 30};
  double load = 0.8;
  std::size_t ports = 0;
  std::size_t warmup = 10'000;
  std::size_t measure = 100'000;
  std::size_t iterations = 1;
  std::size_t workers = default_workers();
  std::string out;
  std::string summary;
};

int cmd_sweep(WorkloadFlags& wf, const SweepFlags& f) {
  SweepOptions so;
  so.node_counts = f.nodes;
  so.seeds = f.seeds;
  so.first_seed = f.first_seed;
  so.workload = wf.resolve();
  so.workers = f.workers;

  std::string rows_csv, summary_csv;
  json params = to_json(so.workload);
  params["figure"] = f.figure;
  params["nodes"] = f.nodes;

  if (f.figure == 7 || f.figure == 8) {
    const auto rows = run_solver_sweep(so);
    rows_csv = "nodes,seed,actual_nodes,cost_mfmttp,cost_gff,reduction,times,servers_mfmttp,servers_gff\n";
    for (const auto& r : rows)
      rows_csv += join_row({num(r.nodes), num(r.seed), num(r.actual_nodes), num(r.cost_mfmttp), num(r.cost_gff),
                            num(r.reduction), num(r.times), num(r.servers_mfmttp), num(r.servers_gff)});
    if (f.figure == 7) {
      summary_csv = "nodes,mean_mfmttp,mean_gff,mean_reduction,stderr_reduction,runs\n";
      for (std::size_t k = 0; k < f.nodes.size(); ++k) {
        std::vector<double> m, g, red;
        for (std::size_t i = 0; i < f.seeds; ++i) {
          const auto& r = rows[k * f.seeds + i];
          m.push_back(r.cost_mfmttp);
          g.push_back(r.cost_gff);
          red.push_back(r.reduction);
        }
        const auto ms = mean_stderr(red);
        summary_csv += join_row({num(f.nodes[k]), num(mean_stderr(m).mean), num(mean_stderr(g).mean), num(ms.mean),
                                 num(ms.stderr_), num(ms.n)});
      }
    } else {
      summary_csv = "nodes,times,count\n";
      for (std::size_t k = 0; k < f.nodes.size(); ++k) {
        std::map<std::size_t, std::size_t> hist;
        for (std::size_t i = 0; i < f.seeds; ++i) ++hist[rows[k * f.seeds + i].times];
        for (auto [t, c] : hist) summary_csv += join_row({num(f.nodes[k]), num(t), num(c)});
      }
    }
  } else {
    ThroughputOptions to;
    to.sweep = so;
    to.port_count = f.ports;
    to.load = f.load;
    to.warmup_slots = f.warmup;
    to.measure_slots = f.measure;
    to.iterations = f.iterations;
    params["load"] = f.load;
    params["ports"] = f.ports;
    params["warmup_slots"] = f.warmup;
    params["measure_slots"] = f.measure;
    params["iterations"] = f.iterations;
    const auto rows = run_throughput_sweep(to);
    rows_csv = "p,nodes,seed,algorithm,throughput,mean_delay,traversal_count\n";
    for (const auto& r : rows) {
      rows_csv += join_row({num(f.load), num(r.nodes), num(r.seed), "mfmttp", num(r.throughput_mfmttp),
                            num(r.delay_mfmttp), num(r.traversals_mfmttp)});
      rows_csv += join_row({num(f.load), num(r.nodes), num(r.seed), "gff", num(r.throughput_gff), num(r.delay_gff),
                            num(r.traversals_gff)});
    }
    summary_csv = "nodes,mean_mfmttp,stderr_mfmttp,mean_gff,stderr_gff,runs\n";
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
      std::vector<double> m, g;
      for (std::size_t i = 0; i < f.seeds; ++i) {
        m.push_back(rows[k * f.seeds + i].throughput_mfmttp);
        g.push_back(rows[k * f.seeds + i].throughput_gff);
      }
      const auto ms = mean_stderr(m), gs = mean_stderr(g);
      summary_csv += join_row({num(f.nodes[k]), num(ms.mean), num(ms.stderr_), num(gs.mean), num(gs.stderr_), num(ms.n)});
    }
  }
  Outputs o;
  o.emit(f.out, rows_csv);
  if (!f.summary.empty()) o.emit(f.summary, summary_csv);
  else if (!f.out.empty() && f.out != "-") std::cout << summary_csv;
  write_manifest(f.out, "sweep", params, seed_list(f.first_seed, f.seeds), o);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-function placement: instance generation, solvers and sweeps"};
  app.set_version_flag("--version", NFP_VERSION);
  app.require_subcommand(1);

  WorkloadFlags wf;
  std::function<int()> run;

  auto* gen = app.add_subcommand("generate", "draw a random instance");
  std::uint64_t seed = 1;
  std::size_t nodes = 0;
  std::string out;
  gen->add_option("--seed", seed, "random seed")->capture_default_str();
  gen->add_option("--nodes", nodes, "target NFI count (0: unconstrained)")->capture_default_str();
  gen->add_option("-o,--out", out, "instance file (default stdout)");
  wf.add_to(gen);
  gen->callback([&] { run = [&] { return cmd_generate(wf, seed, nodes, out); }; });

  auto* sol = app.add_subcommand("solve", "place an instance");
  SolveFlags sf;
  sol->add_option("instance", sf.instance, "instance file")->required()->check(CLI::ExistingFile);
  sol->add_option("-a,--algorithm", sf.algorithm)->check(CLI::IsMember({"mfmttp", "gff", "exact"}))->capture_default_str();
  sol->add_option("-o,--out", sf.out, "placement file");
  sol->add_option("--costs", sf.costs, "per-server cost CSV");
  sol->add_option("--gff-order", sf.gff_order)->check(CLI::IsMember({"ascending", "dfs"}))->capture_default_str();
  sol->add_option("--exact-limit", sf.exact_limit, "largest instance the exact solver accepts")->capture_default_str();
  sol->add_flag("--trace", sf.trace, "print every tentative move to stderr");
  sol->callback([&] { run = [&] { return cmd_solve(sf); }; });

  auto* cmp = app.add_subcommand("compare", "exact optimum against both heuristics over seeds");
  std::size_t seeds = 20, workers = default_workers(), limit = kDefaultExactLimit, cmp_nodes = 8;
  std::uint64_t first_seed = 1;
  cmp->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
  cmp->add_option("--first-seed", first_seed)->capture_default_str();
  cmp->add_option("--nodes", cmp_nodes, "target NFI count")->capture_default_str();
  cmp->add_option("--exact-limit", limit)->capture_default_str();
  cmp->add_option("--workers", workers)->capture_default_str();
  cmp->add_option("-o,--out", out, "CSV file (default stdout)");
  wf.add_to(cmp);
  cmp->callback([&] { run = [&] { return cmd_compare(wf, first_seed, seeds, cmp_nodes, limit, workers, out); }; });

  auto* chk = app.add_subcommand("exact-check", "exact optimum against both heuristics on one instance");
  std::string chk_path;
  chk->add_option("instance", chk_path, "instance file")->required()->check(CLI::ExistingFile);
  chk->add_option("--exact-limit", limit)->capture_default_str();
  chk->callback([&] { run = [&] { return cmd_exact_check(chk_path, limit); }; });

  auto* sw = app.add_subcommand("sweep", "cost reduction (7), iteration counts (8) or throughput (9)");
  SweepFlags swf;
  sw->add_option("--figure", swf.figure)->required()->check(CLI::IsMember({7, 8, 9}));
  sw->add_option("--seeds", swf.seeds)->capture_default_str();
  sw->add_option("--first-seed", swf.first_seed)->capture_default_str();
  sw->add_option("--nodes", swf.nodes, "node counts")->delimiter(',')->capture_default_str();
  sw->add_option("--load", swf.load, "offered load per port")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sw->add_option("--fabric-ports", swf.ports, "fabric ports (0: fit the placements)")->capture_default_str();
  sw->add_option("--warmup", swf.warmup)->capture_default_str();
  sw->add_option("--slots", swf.measure, "measured slots")->capture_default_str();
  sw->add_option("--iterations", swf.iterations, "matcher iterations")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--workers", swf.workers)->capture_default_str();
  sw->add_option("-o,--out", swf.out, "per-run CSV (default stdout)");
  sw->add_option("--summary", swf.summary, "per-node-count summary CSV");
  wf.add_to(sw);
  sw->callback([&] { run = [&] { return cmd_sweep(wf, swf); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}
