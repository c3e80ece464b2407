#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "nfp/mfmttp.hpp"
#include "nfp/placement.hpp"

using namespace nfp;
using nfp::testing::abc_chain;
using nfp::testing::make_igraph;

namespace {

const ServerPool kPool{};

}  // namespace

TEST(EvaluateCost, AllOnOneServer) {
  auto r = evaluate_cost(std::vector<ServerId>{0, 0, 0}, abc_chain(100), kPool);
  EXPECT_EQ(r.total_cost, 0);
  EXPECT_TRUE(r.crossing.empty());
}

TEST(EvaluateCost, OneCrossingEdge) {
  auto r = evaluate_cost(std::vector<ServerId>{0, 0, 1}, abc_chain(100), kPool);
  EXPECT_EQ(r.total_cost, 200);
  ASSERT_EQ(r.crossing.size(), 1u);
  EXPECT_EQ(r.crossing[0].from, 1u);
  EXPECT_EQ(r.crossing[0].to, 2u);
  EXPECT_EQ(r.crossing_traffic, (std::vector<double>{0, 200}));
  EXPECT_EQ(r.link_load, (std::vector<double>{200, 200}));
}

TEST(EvaluateCost, BothEdgesCross) {
  auto r = evaluate_cost(std::vector<ServerId>{0, 1, 2}, abc_chain(100), kPool);
  EXPECT_EQ(r.total_cost, 300);
  EXPECT_EQ(r.crossing.size(), 2u);
  EXPECT_EQ(r.link_load, (std::vector<double>{100, 300, 200}));
}

TEST(EvaluateCost, UnassignedNode) {
  try {
    evaluate_cost(std::vector<ServerId>{0, kUnassigned, 0}, abc_chain(100), kPool);
    FAIL();
  } catch (const UnassignedNode& e) {
    EXPECT_EQ(e.node(), 1u);
  }
  EXPECT_THROW(evaluate_cost(std::vector<ServerId>{0, 0}, abc_chain(100), kPool), UnassignedNode);
}

TEST(EvaluateCost, UnitCostScales) {
  ServerPool pool;
  pool.unit_link_cost = 2.5;
  EXPECT_EQ(evaluate_cost(std::vector<ServerId>{0, 1, 2}, abc_chain(100), pool).total_cost, 750);
  pool.unit_link_cost = 0;
  EXPECT_EQ(evaluate_cost(std::vector<ServerId>{0, 1, 2}, abc_chain(100), pool).total_cost, 0);
}

TEST(CheckCapacity, Examples) {
  auto ig = make_igraph({400, 500, 600, 600}, {});
  auto ok = check_capacity({0, 0, 1, 1}, ig, kPool);
  EXPECT_EQ(ok, (std::vector<bool>{true, false}));
  ok = check_capacity({0, 0, 2, 3}, ig, kPool);
  EXPECT_TRUE(ok[1]);  // empty slot
}

TEST(CheckBandwidth, ExternalOnly) {
  auto ig = make_igraph({100}, {});
  ig.nodes[0].ingress = 100;
  ig.nodes[0].egress = 100;
  EXPECT_EQ(link_usage({0}, ig), (std::vector<double>{200}));
  EXPECT_EQ(check_bandwidth({0}, ig, kPool), (std::vector<bool>{true}));
}

TEST(CheckBandwidth, MiddleNodeOverloaded) {
  auto ig = make_igraph({100, 100, 100}, {{0, 1, 600}, {1, 2, 600}});
  EXPECT_EQ(link_usage({0, 1, 2}, ig)[1], 1200);
  EXPECT_EQ(check_bandwidth({0, 1, 2}, ig, kPool), (std::vector<bool>{true, false, true}));
  EXPECT_EQ(check_bandwidth({0, 2, 3}, ig, kPool)[1], true);  // unused slot
}

TEST(CheckPortLimit, Examples) {
  ServerPool pool;
  pool.port_limit = 4;
  EXPECT_TRUE(check_port_limit({0, 1, 2, 2}, pool));
  EXPECT_FALSE(check_port_limit({0, 1, 2, 3, 4}, pool));
  EXPECT_TRUE(check_port_limit({}, pool));
}

TEST(IsFeasible, MissingNode) {
  auto f = is_feasible(std::vector<ServerId>{0, kUnassigned, 0}, abc_chain(100), kPool);
  EXPECT_FALSE(f);
  ASSERT_EQ(f.violations.size(), 1u);
  EXPECT_EQ(f.violations[0].constraint, Violation::Constraint::Assignment);
  EXPECT_EQ(f.violations[0].index, 1u);
}

TEST(IsFeasible, OverloadByOneUnit) {
  auto ig = make_igraph({500, 501, 100}, {});
  auto f = is_feasible(std::vector<ServerId>{0, 0, 1}, ig, kPool);
  EXPECT_FALSE(f);
  ASSERT_EQ(f.violations.size(), 1u);
  EXPECT_EQ(f.violations[0].constraint, Violation::Constraint::Capacity);
  EXPECT_EQ(f.violations[0].index, 0u);
}

TEST(IsFeasible, SolverOutput) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 12));
    EXPECT_TRUE(is_feasible(solve(inst.igraph, inst.pool()).placement, inst.igraph, inst.pool()));
  }
}

TEST(Placement, PermutationInvariance) {
  Rng rng(11);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 15));
    auto y = nfp::testing::random_feasible(inst.igraph, inst.pool(), rng);
    std::vector<ServerId> perm(server_slot_count(y));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    auto z = y;
    for (auto& s : z) s = perm[s];
    EXPECT_DOUBLE_EQ(evaluate_cost(y, inst.igraph, inst.pool()).total_cost,
                     evaluate_cost(z, inst.igraph, inst.pool()).total_cost);
    EXPECT_EQ(is_feasible(y, inst.igraph, inst.pool()).ok, is_feasible(z, inst.igraph, inst.pool()).ok);
  }
}

TEST(Placement, CachedUsageMatchesRecomputation) {
  Rng rng(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 20));
    const Adjacency adj(inst.igraph);
    auto p = Placement::from_assignment(nfp::testing::random_feasible(inst.igraph, inst.pool(), rng), adj);
    for (int step = 0; step < 200; ++step) {
      const auto v = static_cast<NodeId>(rng.uniform_int(0, static_cast<std::int64_t>(inst.igraph.size()) - 1));
      const auto to = static_cast<ServerId>(rng.uniform_int(0, static_cast<std::int64_t>(p.server_slots())));
      if (to == p.server_of(v)) continue;
      const auto fx = p.move_effect(v, to, adj);
      const auto from = p.server_of(v);
      p.move(v, to, adj);
      EXPECT_NEAR(p.compute_usage(to), fx.target_compute, 1e-9);
      EXPECT_NEAR(p.link_usage(to), fx.target_link, 1e-9);
      EXPECT_NEAR(p.link_usage(from), fx.source_link, 1e-9);
      const auto cu = compute_usage(p.assignment(), inst.igraph);
      const auto lu = link_usage(p.assignment(), inst.igraph);
      for (std::size_t s = 0; s < cu.size(); ++s) {
        EXPECT_NEAR(p.compute_usage(static_cast<ServerId>(s)), cu[s], 1e-9);
        EXPECT_NEAR(p.link_usage(static_cast<ServerId>(s)), lu[s], 1e-9);
      }
      EXPECT_EQ(p.used_servers(), used_server_count(p.assignment()));
    }
  }
}

TEST(Placement, PlacingUnassignedNodeMatchesRecomputation) {
  Rng rng(11);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 20));
    const Adjacency adj(inst.igraph);
    Placement p(inst.igraph.size());
    for (NodeId v = 0; v < inst.igraph.size(); ++v) {
      const auto to = static_cast<ServerId>(rng.uniform_int(0, static_cast<std::int64_t>(p.server_slots())));
      const auto fx = p.move_effect(v, to, adj);
      p.assign(v, to, adj);
      EXPECT_NEAR(p.compute_usage(to), fx.target_compute, 1e-9);
      EXPECT_NEAR(p.link_usage(to), fx.target_link, 1e-9);
    }
  }
}

TEST(Placement, UnassignEmptiesServer) {
  auto ig = abc_chain(100);
  const Adjacency adj(ig);
  auto p = Placement::from_assignment({0, 1, 1}, adj);
  EXPECT_EQ(p.used_servers(), 2u);
  p.unassign(0, adj);
  EXPECT_EQ(p.used_servers(), 1u);
  EXPECT_EQ(p.compute_usage(0), 0);
  EXPECT_EQ(p.link_usage(0), 0);
  EXPECT_EQ(p.link_usage(1), 0);
  EXPECT_FALSE(p.complete());
  EXPECT_EQ(p.first_empty_slot(), 0);
}

TEST(ServerPool, Validate) {
  EXPECT_NO_THROW(ServerPool{}.validate());
  EXPECT_THROW((ServerPool{0, 1, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW((ServerPool{1, 0, 1, 1}.validate()), InvalidArgument);
  EXPECT_THROW((ServerPool{1, 1, 0, 1}.validate()), InvalidArgument);
  EXPECT_THROW((ServerPool{1, 1, 1, -1}.validate()), InvalidArgument);
}
