#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "fixtures.hpp"
#include "nfp/workload.hpp"

using namespace nfp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nfp_test_" + name)).string();
}

}  // namespace

TEST(Rng, Reproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  // std::mt19937_64 with the default seed produces 9981545732273789042 as its 10000th value.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng c(5489);
  for (int i = 0; i < 9999; ++i) c.next();
  EXPECT_EQ(c.next(), 9981545732273789042ULL);
}

TEST(Rng, UniformIntRange) {
  Rng r(1);
  std::vector<int> hist(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const auto x = r.uniform_int(100, 105);
    ASSERT_GE(x, 100);
    ASSERT_LE(x, 105);
    ++hist[static_cast<std::size_t>(x - 100)];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_THROW(r.uniform_int(2, 1), InvalidArgument);
  EXPECT_EQ(r.uniform_int(7, 7), 7);
}

TEST(Rng, DerivedStreamsDiffer) {
  auto a = Rng::derive(1, {0, 1});
  auto b = Rng::derive(1, {0, 2});
  auto c = Rng::derive(1, {0, 1});
  const auto x = a.next();
  EXPECT_NE(x, b.next());
  EXPECT_EQ(x, c.next());
}

TEST(Generate, SameSeedSameBytes) {
  auto p = nfp::testing::small_params(42, 20);
  EXPECT_EQ(serialize_instance(generate_instance(p)), serialize_instance(generate_instance(p)));
  auto q = p;
  q.seed = 43;
  EXPECT_NE(serialize_instance(generate_instance(p)), serialize_instance(generate_instance(q)));
}

TEST(Generate, DegenerateRanges) {
  WorkloadParams p;
  p.chain_length = {1, 1};
  p.instances_per_nf = {1, 1};
  p.sfc_count = 3;
  p.nf_type_count = 10;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    p.seed = seed;
    auto inst = generate_instance(p);
    EXPECT_TRUE(inst.igraph.edges.empty());
    EXPECT_LE(inst.igraph.size(), 3u);
    for (const auto& r : inst.requests) EXPECT_EQ(r.chain.size(), 1u);
  }
}

TEST(Generate, HitsNodeTargetsAndRanges) {
  for (std::size_t nodes : {10u, 15u, 20u, 25u, 30u}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto p = nfp::testing::small_params(seed, nodes);
      auto inst = generate_instance(p);
      EXPECT_EQ(inst.igraph.size(), nodes);
      EXPECT_TRUE(validate_igraph(inst.igraph).empty());
      for (const auto& e : inst.igraph.edges) {
        EXPECT_GE(e.weight, 100);
        EXPECT_LE(e.weight, 600);
        EXPECT_EQ(e.weight, std::floor(e.weight));
      }
      for (const auto& n : inst.igraph.nodes) {
        EXPECT_GE(n.demand, 100);
        EXPECT_LE(n.demand, 600);
      }
      for (const auto& [nf, k] : inst.igraph.instance_counts()) {
        EXPECT_GE(k, 1u);
        EXPECT_LE(k, 5u);
      }
      for (const auto& r : inst.requests) {
        EXPECT_GE(r.chain.size(), 1u);
        EXPECT_LE(r.chain.size(), 6u);
      }
    }
  }
}

TEST(Generate, TrafficMeanNearMidpoint) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto p = nfp::testing::small_params(seed, 0);
    p.solvable_only = false;
    for (const auto& r : generate_instance(p).requests) {
      sum += r.bandwidth;
      ++count;
    }
  }
  ASSERT_GE(count, 2000u);
  EXPECT_NEAR(sum / static_cast<double>(count), 350.0, 0.02 * 350.0);
}

TEST(Generate, LoadBasedCounts) {
  WorkloadParams p;
  p.load_based_counts = true;
  p.seed = 3;
  p.solvable_only = false;
  p.traffic = {1, 600};
  auto inst = generate_instance(p);
  for (const auto& v : inst.graph.vertices)
    EXPECT_EQ(inst.igraph.instances_of(v.nf).size(), instance_count(v.demand, p.instance_capacity));
}

TEST(Generate, BoundedSum) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto count = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const auto total = rng.uniform_int(100 * static_cast<std::int64_t>(count), 600 * static_cast<std::int64_t>(count));
    auto xs = detail::bounded_sum(rng, count, total, 100, 600);
    std::int64_t s = 0;
    for (auto x : xs) {
      EXPECT_GE(x, 100);
      EXPECT_LE(x, 600);
      s += x;
    }
    EXPECT_EQ(s, total);
  }
}

TEST(Generate, InvalidParams) {
  WorkloadParams p;
  p.traffic = {0, 5};
  EXPECT_THROW(generate_instance(p), InvalidArgument);
  p = {};
  p.chain_length = {3, 2};
  EXPECT_THROW(generate_instance(p), InvalidArgument);
  p = {};
  p.sfc_count = 0;
  EXPECT_THROW(generate_instance(p), InvalidArgument);
}

TEST(InstanceFile, RoundTrip) {
  const auto path = temp_path("roundtrip.json");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = generate_instance(nfp::testing::small_params(seed, 10 + seed));
    save_instance(path, inst);
    EXPECT_EQ(load_instance(path), inst);
  }
  // Non-integral weights survive too.
  auto g = build_sfc_graph({{0, {0, 1}, 100.0 / 3.0, {0.1, 0.7}}});
  Instance inst{"thirds", std::nullopt, {{0, "fw"}, {1, "nat"}}, {{0, {0, 1}, 100.0 / 3.0, {0.1, 0.7}}}, g,
                optimize_igraph(expand_with_counts(g, {{0, 3}, {1, 2}}))};
  save_instance(path, inst);
  EXPECT_EQ(load_instance(path), inst);
  std::remove(path.c_str());
}

TEST(InstanceFile, TruncatedIsParseError) {
  const auto text = serialize_instance(generate_instance(nfp::testing::small_params(1, 10)));
  const auto cut = text.substr(0, text.size() / 2);
  try {
    parse_instance(cut);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1u);
    EXPECT_GE(e.column(), 1u);
  }
}

TEST(InstanceFile, ReportsLineAndColumn) {
  try {
    parse_instance("{\n  \"format\": \"nfp-instance\",\n  \"version\": 1,,\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 16u);
  }
}

TEST(InstanceFile, VersionMismatch) {
  auto doc = to_json(generate_instance(nfp::testing::small_params(1, 10)));
  doc["version"] = 2;
  EXPECT_THROW(parse_instance(doc.dump()), VersionMismatch);
  doc["format"] = "something-else";
  EXPECT_THROW(parse_instance(doc.dump()), VersionMismatch);
}

TEST(InstanceFile, StructuralErrorIsParseError) {
  auto doc = to_json(generate_instance(nfp::testing::small_params(1, 10)));
  doc.erase("igraph");
  EXPECT_THROW(parse_instance(doc.dump()), ParseError);
}

TEST(InstanceFile, NegativeTrafficLoadsWithDiagnostic) {
  auto inst = generate_instance(nfp::testing::small_params(2, 12));
  auto doc = to_json(inst);
  doc["igraph"]["edges"][0][2] = -5.0;
  auto loaded = parse_instance(doc.dump(2));
  auto d = validate_igraph(loaded.igraph);
  ASSERT_FALSE(d.empty());
  bool negative = false;
  for (const auto& x : d) negative = negative || x.kind == Diagnostic::Kind::NegativeWeight;
  EXPECT_TRUE(negative);
}

TEST(InstanceFile, MissingFile) { EXPECT_THROW(load_instance(temp_path("does_not_exist.json")), Error); }
