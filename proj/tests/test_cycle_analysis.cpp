#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bagprob/circuit.hpp"
#include "bagprob/cycle_analysis.hpp"
#include "bagprob/propagate.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bagprob;
using namespace testing_support;

namespace {

/// Enumeration-based classification straight from the definitions, using
/// the reference trajectory simulator.
CycleType reference_type(const AttackGraph& g, const CyclePath& cycle,
                         NodeId target) {
  std::vector<std::size_t> free, members;
  for (NodeId v : cycle.node_set()) members.push_back(*g.index_of(v));
  std::vector<bool> base(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = g.prob_at(i);
    if (p > 0.0 && p < 1.0) {
      free.push_back(i);
    } else {
      base[i] = p == 1.0;
    }
  }
  const std::size_t t = *g.index_of(target);
  std::vector<bool> ever_on(g.size(), false);
  bool type2 = true;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << free.size()); ++x) {
    auto bits = base;
    for (std::size_t j = 0; j < free.size(); ++j) bits[free[j]] = (x >> j) & 1;
    const auto traj = oracle::trajectory(g, bits);
    for (std::size_t m : members) ever_on[m] = ever_on[m] || traj.back()[m];
    for (std::size_t k = 1; k < traj.size(); ++k) {
      if (!traj[k][t]) continue;
      for (std::size_t m : members) {
        if (traj[k - 1][m]) type2 = false;
      }
      break;
    }
  }
  for (std::size_t m : members) {
    if (!ever_on[m]) return CycleType::Type1;
  }
  return type2 ? CycleType::Type2 : CycleType::Type3;
}

}  // namespace

TEST(FirstHit, AndExample) {
  const AugmentedGraph aug = augment(load("fig5.json"));
  const auto hits = first_hit(aug, Instantiation::filled(aug, true));
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].k_star_i, 1u);
  EXPECT_EQ(hits[1].k_star_i, 1u);
  EXPECT_EQ(hits[2].k_star_i, 2u);
  for (const auto& h : first_hit(aug, Instantiation::filled(aug, false))) {
    EXPECT_FALSE(h.k_star_i.has_value());
  }
}

TEST(FirstHit, LeafHitsAtOne) {
  AttackGraph g({leaf(0, 0.5)}, {});
  const AugmentedGraph aug = augment(g);
  EXPECT_EQ(first_hit(aug, Instantiation::filled(aug, true))[0].k_star_i, 1u);
}

TEST(FirstHit, BoundedByFixedPoint) {
  std::mt19937_64 rng(71);
  std::bernoulli_distribution coin(0.8);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::RandomSpec spec;
    spec.n = 3 + trial % 30;
    const AttackGraph g = oracle::random_cyclic(rng, spec);
    const AugmentedGraph aug = augment(g);
    Instantiation inst = Instantiation::filled(aug, false);
    for (std::size_t i = 0; i < g.size(); ++i) inst.set(aug, g.id_at(i), coin(rng));
    const FixedPoint fp = fixed_point(aug, inst);
    const auto hits = first_hit(aug, inst);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(hits[i].node, g.id_at(i));
      EXPECT_EQ(hits[i].k_star_i.has_value(), fp.state.values[i]);
      if (hits[i].k_star_i) EXPECT_LE(*hits[i].k_star_i, fp.k_star);
    }
  }
}

TEST(Classify, Type1Fixture) {
  const AttackGraph g = load("type1.json");
  const auto reports = classify_all(g, 3);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].type, CycleType::Type1);
  EXPECT_FALSE(reports[0].witness.has_value());
  // No target is needed for a cycle that never fires.
  EXPECT_EQ(classify_cycle(g, reports[0].cycle, std::nullopt).type, CycleType::Type1);
  EXPECT_EQ(reachability_exact(g, 2).probability, 0.0);
}

TEST(Classify, Type2Fixture) {
  const AttackGraph g = load("type2.json");
  const auto reports = classify_all(g, 3);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].type, CycleType::Type2);
  EXPECT_EQ(reports[0].target, std::optional<NodeId>(3));
  EXPECT_EQ(closing_edge(g, reports[0].cycle), (Edge{6, 3}));
  const double before = reachability_exact(g, 3).probability;
  const double after = reachability_exact(without_edge(g, {6, 3}), 3).probability;
  EXPECT_NEAR(before, after, 1e-12);
}

TEST(Classify, Type3FixtureWithWitness) {
  const AttackGraph g = load("type3.json");
  const auto reports = classify_all(g, 3);
  ASSERT_EQ(reports.size(), 1u);
  const CycleReport& r = reports[0];
  EXPECT_EQ(r.type, CycleType::Type3);
  ASSERT_TRUE(r.witness.has_value());
  // Replay the witness: the target first fires at k+1 while the witness
  // node was already on at k.
  const AugmentedGraph aug = augment(g);
  const auto hits = first_hit(aug, r.witness->instantiation);
  const std::size_t t = *g.index_of(3);
  ASSERT_TRUE(hits[t].k_star_i.has_value());
  EXPECT_EQ(*hits[t].k_star_i, r.witness->k + 1);
  const auto wn = *g.index_of(r.witness->node);
  ASSERT_TRUE(hits[wn].k_star_i.has_value());
  EXPECT_LE(*hits[wn].k_star_i, r.witness->k);

  const Edge cut = closing_edge(g, r.cycle);
  EXPECT_EQ(cut, (Edge{6, 3}));
  const double before = reachability_exact(g, 3).probability;
  const double after = reachability_exact(without_edge(g, cut), 3).probability;
  EXPECT_GT(std::abs(before - after), 1e-12);
}

TEST(Classify, TargetRequired) {
  const AttackGraph g = load("type3.json");
  const auto cycles = find_cycles(g);
  ASSERT_EQ(cycles.size(), 1u);
  EXPECT_BAG_ERROR(classify_cycle(g, cycles[0], std::nullopt), ErrorCode::TargetRequired);
}

TEST(Classify, TooLarge) {
  std::vector<Node> nodes{or_node(100), or_node(101)};
  std::vector<Edge> edges{{100, 101}, {101, 100}};
  for (NodeId i = 0; i < 21; ++i) {
    nodes.push_back(leaf(i, 0.5));
    nodes.push_back(and_node(200 + i));
    edges.push_back({i, 200 + i});
    edges.push_back({200 + i, 100});
  }
  const AttackGraph g(nodes, edges);
  EXPECT_BAG_ERROR(classify_all(g, 100), ErrorCode::TooLarge);
}

TEST(Classify, RunningExampleIsType3) {
  const auto reports = classify_all(load("running-example.json"), 14);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].cycle.node_set(),
            (std::vector<NodeId>{6, 7, 8, 9, 11, 12, 14, 21}));
  EXPECT_EQ(reports[0].type, CycleType::Type3);
}

TEST(Classify, AcyclicGraphHasNoReports) {
  EXPECT_TRUE(classify_all(load("fig5.json"), 2).empty());
}

TEST(Classify, MatchesReferenceOnRandomGraphs) {
  std::mt19937_64 rng(73);
  std::size_t counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 150; ++trial) {
    oracle::RandomSpec spec;
    spec.n = 4 + trial % 9;
    const AttackGraph g = oracle::random_cyclic(rng, spec);
    std::vector<CyclePath> cycles;
    try {
      cycles = find_cycles(g, 200);
    } catch (const CycleLimitError&) {
      continue;
    }
    for (const auto& c : cycles) {
      const NodeId target = c.nodes[1];
      const CycleReport r = classify_cycle(g, c, target);
      EXPECT_EQ(r.type, reference_type(g, c, target)) << "trial " << trial;
      ++counts[static_cast<int>(r.type)];
    }
  }
  // The random family should exercise every outcome.
  EXPECT_GT(counts[0], 0u);
  EXPECT_GT(counts[1], 0u);
  EXPECT_GT(counts[2], 0u);
}

TEST(Classify, IndependentOfEnumerationOrder) {
  const AttackGraph g = load("running-example.json");
  const auto cycles = find_cycles(g);
  const auto a = classify_cycle(g, cycles[0], 14);
  // Same cycle presented from a different starting node.
  CyclePath rotated;
  for (std::size_t i = 1; i < cycles[0].nodes.size(); ++i) {
    rotated.nodes.push_back(cycles[0].nodes[i]);
  }
  rotated.nodes.push_back(rotated.nodes.front());
  const auto b = classify_cycle(g, rotated, 14);
  EXPECT_EQ(a.type, b.type);
  EXPECT_EQ(closing_edge(g, cycles[0]), closing_edge(g, rotated));
}
