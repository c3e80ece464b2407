#include <gtest/gtest.h>

#include <bit>

#include "fixtures.hpp"
#include "nfp/fabric_sim.hpp"
#include "nfp/mfmttp.hpp"

using namespace nfp;
using nfp::testing::make_igraph;

namespace {

/// Two-NF chain with one instance each.
struct TwoStep {
  SfcIGraph ig = [] {
    auto g = make_igraph({100, 100}, {{0, 1, 50}});
    g.nodes[0].ingress = 50;
    g.nodes[1].egress = 50;
    return g;
  }();
  std::vector<SfcRequest> requests{{0, {0, 1}, 50, {100, 100}}};
};

FabricConfig config(std::size_t ports, double load, std::uint64_t seed) {
  FabricConfig c;
  c.port_count = ports;
  c.load = load;
  c.warmup_slots = 2000;
  c.measure_slots = 50000;
  c.seed = seed;
  return c;
}

bool is_matching(const std::vector<int>& match, std::size_t ports) {
  std::uint64_t outs = 0;
  for (std::size_t i = 0; i < ports; ++i) {
    if (match[i] < 0) continue;
    const auto bit = 1ULL << match[i];
    if (outs & bit) return false;
    outs |= bit;
  }
  return true;
}

}  // namespace

TEST(DerivePaths, ColocatedChainCrossesTwice) {
  TwoStep t;
  auto paths = derive_paths({3, 3}, t.ig, t.requests);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].servers, (std::vector<ServerId>{0}));
  EXPECT_EQ(paths[0].traversal_count(), 2u);
  EXPECT_EQ(paths[0].weight, 50);
}

TEST(DerivePaths, SplitChainCrossesThreeTimes) {
  TwoStep t;
  auto paths = derive_paths({1, 2}, t.ig, t.requests);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].servers, (std::vector<ServerId>{0, 1}));
  EXPECT_EQ(paths[0].traversal_count(), 3u);
  auto hops = paths[0].traversals(5, 6);
  using Hop = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(hops, (std::vector<Hop>{{5, 0}, {0, 1}, {1, 6}}));
}

TEST(DerivePaths, EmptyChainCrossesOnce) {
  SfcRequest r{0, {}, 10, {}};
  auto paths = derive_paths({}, SfcIGraph{}, {r});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].traversal_count(), 1u);
}

TEST(DerivePaths, UnassignedPropagates) {
  TwoStep t;
  EXPECT_THROW(derive_paths({0, kUnassigned}, t.ig, t.requests), UnassignedNode);
}

TEST(DerivePaths, SplitsByInstanceTraffic) {
  // NF0 has two instances feeding NF1's single instance 3:1.
  SfcIGraph ig;
  ig.nodes = {{0, 0, 100, 20, 0}, {1, 0, 100, 20, 0}, {2, 1, 100, 0, 40}};
  ig.edges = {{0, 2, 30}, {1, 2, 10}};
  ig.nf_edges = {{0, 1, 40}};
  std::vector<SfcRequest> rs{{0, {0, 1}, 40, {200, 100}}};
  auto paths = derive_paths({0, 1, 1}, ig, rs);
  ASSERT_EQ(paths.size(), 2u);
  double w = 0.0;
  for (const auto& p : paths) w += p.weight;
  EXPECT_DOUBLE_EQ(w, 40);
  EXPECT_DOUBLE_EQ(mean_traversals(paths), 2.5);
}

TEST(DerivePaths, FewerCrossingsAfterSolve) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 20));
    auto all = derive_paths(std::vector<ServerId>(inst.igraph.size(), 0), inst.igraph, inst.requests);
    EXPECT_DOUBLE_EQ(mean_traversals(all), 2.0);
    auto apart = std::vector<ServerId>(inst.igraph.size());
    for (NodeId v = 0; v < apart.size(); ++v) apart[v] = static_cast<ServerId>(v);
    double longest = 0.0;
    for (const auto& r : inst.requests) longest = std::max(longest, static_cast<double>(r.chain.size()));
    EXPECT_GE(mean_traversals(derive_paths(apart, inst.igraph, inst.requests)), 2.0);
    EXPECT_LE(mean_traversals(derive_paths(apart, inst.igraph, inst.requests)), longest + 1.0);
  }
}

TEST(Simulate, ZeroLoad) {
  std::vector<FlowPath> paths{{0, {0}, 1.0}};
  auto r = simulate(config(1, 0.0, 1), paths);
  EXPECT_EQ(r.throughput, 0);
  EXPECT_EQ(r.arrivals, 0u);
}

TEST(Simulate, UncontendedSingleFlow) {
  std::vector<FlowPath> paths{{0, {0}, 1.0}};
  auto cfg = config(1, 0.4, 1);
  cfg.measure_slots = 100000;
  auto r = simulate(cfg, paths);
  EXPECT_NEAR(r.throughput, 0.4, 0.02);
  EXPECT_LE(r.throughput, r.offered_load + 1e-3);
}

TEST(Simulate, ExtraCrossingsCostThroughput) {
  // Co-located, every cell enters server 0 once; split 0 -> 1 -> 0, twice.
  // At p = 0.9 on two ports, server 0's output caps departures at 1 and 1/2
  // cells per slot respectively.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto together = simulate(config(2, 0.9, seed), {{0, {0}, 1.0}});
    auto split = simulate(config(2, 0.9, seed), {{0, {0, 1, 0}, 1.0}});
    EXPECT_LT(split.throughput, together.throughput);
    EXPECT_LE(together.throughput, 0.5 + 0.01);
    EXPECT_LE(split.throughput, 0.25 + 0.01);
  }
}

TEST(Simulate, ConservationAndLegalityEverySlot) {
  std::vector<FlowPath> paths{{0, {0, 2}, 2.0}, {1, {1}, 1.0}, {2, {3, 0, 1}, 1.5}, {3, {}, 0.5}};
  for (std::size_t iterations : {1u, 2u, 4u}) {
    auto cfg = config(6, 0.7, 3);
    cfg.iterations = iterations;
    cfg.warmup_slots = 500;
    cfg.measure_slots = 5000;
    std::size_t slots = 0;
    auto r = simulate(cfg, paths, [&](const SlotEvent& e) {
      ++slots;
      ASSERT_EQ(e.arrivals, e.departures + e.queued);
      ASSERT_TRUE(is_matching(e.match, 6));
      for (std::size_t i = 0; i < 6; ++i)
        if (e.match[i] >= 0) {
          ASSERT_TRUE(e.requests[i] >> e.match[i] & 1);
        }
    });
    EXPECT_EQ(slots, 5500u);
    EXPECT_EQ(r.arrivals, r.departures + r.queued);
    std::uint64_t delivered = 0;
    for (auto d : r.per_flow_delivered) delivered += d;
    EXPECT_LE(static_cast<double>(delivered), r.throughput * 6 * 5000 + 0.5);
  }
}

TEST(Simulate, Deterministic) {
  std::vector<FlowPath> paths{{0, {0, 1}, 1.0}, {1, {1}, 2.0}};
  auto a = simulate(config(3, 0.6, 9), paths);
  auto b = simulate(config(3, 0.6, 9), paths);
  EXPECT_EQ(a.throughput, b.throughput);
  EXPECT_EQ(a.mean_delay, b.mean_delay);
  EXPECT_EQ(a.per_flow_delivered, b.per_flow_delivered);
  auto c = simulate(config(3, 0.6, 10), paths);
  EXPECT_NE(a.per_flow_delivered, c.per_flow_delivered);
}

TEST(Simulate, RejectsBadConfig) {
  std::vector<FlowPath> paths{{0, {2}, 1.0}};
  EXPECT_THROW(simulate(config(2, 0.5, 1), paths), InvalidArgument);
  EXPECT_THROW(simulate(config(65, 0.5, 1), {}), InvalidArgument);
  EXPECT_THROW(simulate(config(2, 1.5, 1), {}), InvalidArgument);
  auto cfg = config(2, 0.5, 1);
  cfg.iterations = 0;
  EXPECT_THROW(simulate(cfg, {}), InvalidArgument);
}

TEST(Matcher, TwoByTwoExhaustive) {
  // Every request pattern from every pointer state.
  for (std::size_t iterations : {1u, 2u}) {
    for (std::uint64_t pattern = 0; pattern < 16; ++pattern) {
      const std::vector<std::uint64_t> req{pattern & 3, pattern >> 2 & 3};
      for (std::size_t ptr = 0; ptr < 16; ++ptr) {
        RoundRobinMatcher m(2, iterations);
        m.set_pointers({ptr & 1, ptr >> 1 & 1}, {ptr >> 2 & 1, ptr >> 3 & 1});
        const auto match = m.match(req);
        ASSERT_TRUE(is_matching(match, 2));
        std::size_t size = 0;
        for (std::size_t i = 0; i < 2; ++i) {
          if (match[i] < 0) continue;
          ASSERT_TRUE(req[i] >> match[i] & 1);
          ++size;
        }
        if (pattern) {
          ASSERT_GE(size, 1u);
        }
        if (iterations >= 2) {
          // Maximal: no unmatched input still requests an unmatched output.
          std::uint64_t used = 0;
          for (auto j : match)
            if (j >= 0) used |= 1ULL << j;
          for (std::size_t i = 0; i < 2; ++i)
            if (match[i] < 0) {
              ASSERT_EQ(req[i] & ~used, 0u) << "pattern " << pattern << " ptr " << ptr;
            }
        }
      }
    }
  }
}

TEST(Matcher, FirmGrantPointerRule) {
  RoundRobinMatcher m(2, 1);
  // Both outputs grant input 0; it accepts output 0 only.
  m.match({3, 0});
  EXPECT_EQ(m.grant_pointer(0), 1u);  // accepted: one past
  EXPECT_EQ(m.grant_pointer(1), 0u);  // refused: stays on the granted input
  EXPECT_EQ(m.accept_pointer(0), 1u);
}

TEST(Matcher, RoundRobinFairnessUnderFullLoad) {
  // Pointers desynchronize within a few slots, then every slot is a full
  // matching and each VOQ is served once every four slots.
  RoundRobinMatcher m(4, 1);
  std::vector<std::uint64_t> all(4, 0xF);
  for (int slot = 0; slot < 16; ++slot) m.match(all);
  std::vector<std::size_t> served(16, 0);
  for (int slot = 0; slot < 400; ++slot) {
    const auto& match = m.match(all);
    for (std::size_t i = 0; i < 4; ++i) {
      ASSERT_GE(match[i], 0) << "slot " << slot;
      ++served[i * 4 + static_cast<std::size_t>(match[i])];
    }
  }
  for (auto s : served) EXPECT_EQ(s, 100u);
}
