#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "bagprob/formats.hpp"
#include "bagprob/generator.hpp"
#include "test_support.hpp"

using namespace bagprob;
using namespace testing_support;

namespace {

GenParams params_for(std::size_t n, double c, std::uint64_t seed) {
  GenParams p;
  p.n = n;
  p.cyclicity = c;
  p.seed = seed;
  return p;
}

void expect_wiring_contract(const AttackGraph& g, const GenParams& params) {
  ASSERT_TRUE(g.valid());
  ASSERT_EQ(g.size(), params.n);
  const NodeCounts planned = planned_counts(params);
  NodeCounts got;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto parents = g.parents_at(i);
    switch (g.kind_at(i)) {
      case NodeKind::Leaf: {
        ++got.leaves;
        const double p = g.prob_at(i);
        EXPECT_TRUE(p == 0.35 || p == 0.61 || p == 0.71) << p;
        break;
      }
      case NodeKind::And: {
        ++got.ands;
        EXPECT_EQ(g.prob_at(i), 1.0);
        bool has_leaf = false;
        for (auto j : parents) {
          EXPECT_NE(g.kind_at(j), NodeKind::And);
          has_leaf |= g.kind_at(j) == NodeKind::Leaf;
        }
        EXPECT_TRUE(has_leaf) << "And " << g.id_at(i);
        break;
      }
      case NodeKind::Or:
        ++got.ors;
        EXPECT_EQ(g.prob_at(i), 1.0);
        for (auto j : parents) EXPECT_EQ(g.kind_at(j), NodeKind::And);
        break;
    }
  }
  EXPECT_EQ(got.leaves, planned.leaves);
  EXPECT_EQ(got.ands, planned.ands);
  EXPECT_EQ(got.ors, planned.ors);
}

}  // namespace

TEST(Generator, DefaultRatioCounts) {
  const GenParams p = params_for(1000, 0, 1);
  const NodeCounts c = planned_counts(p);
  EXPECT_EQ(c.leaves, 500u);
  EXPECT_EQ(c.ands, 350u);
  EXPECT_EQ(c.ors, 150u);
  expect_wiring_contract(generate(p), p);
}

TEST(Generator, ZeroCyclicityIsAcyclic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AttackGraph g = generate(params_for(300, 0, seed));
    EXPECT_TRUE(find_cycles(g).empty());
    EXPECT_EQ(achieved_cyclicity(g), 0.0);
  }
}

TEST(Generator, FullCyclicityCoversEveryOr) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GenParams p = params_for(500, 100, seed);
    const AttackGraph g = generate(p);
    expect_wiring_contract(g, p);
    const auto mask = on_cycle_mask(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.kind_at(i) == NodeKind::Or) EXPECT_TRUE(mask[i]) << g.id_at(i);
    }
  }
}

TEST(Generator, AchievedCyclicityMeetsRequest) {
  for (double c : {1.0, 5.0, 25.0, 50.0, 75.0, 100.0}) {
    for (std::size_t n : {50u, 200u, 1000u}) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const GenParams p = params_for(n, c, seed);
        const AttackGraph g = generate(p);
        expect_wiring_contract(g, p);
        EXPECT_GE(achieved_cyclicity(g) + 1e-9, c) << "n=" << n << " c=" << c;
      }
    }
  }
}

TEST(Generator, DeterministicPerSeed) {
  const GenParams p = params_for(400, 25, 99);
  EXPECT_EQ(graph_to_json(generate(p)), graph_to_json(generate(p)));
  EXPECT_NE(graph_to_json(generate(p)),
            graph_to_json(generate(params_for(400, 25, 100))));
}

TEST(Generator, CustomRatioAndParentCap) {
  GenParams p = params_for(200, 50, 3);
  p.ratio = {40, 40, 20};
  p.max_parents = 3;
  const AttackGraph g = generate(p);
  expect_wiring_contract(g, p);
  EXPECT_EQ(planned_counts(p).ors, 40u);
}

TEST(Generator, InvalidParameters) {
  GenParams p = params_for(2, 0, 1);
  EXPECT_BAG_ERROR(generate(p), ErrorCode::InvalidArgument);
  p = params_for(10, 200, 1);
  EXPECT_BAG_ERROR(generate(p), ErrorCode::InvalidArgument);
  p = params_for(10, 0, 1);
  p.ratio = {50, 30, 15};
  EXPECT_BAG_ERROR(generate(p), ErrorCode::InvalidArgument);
}

TEST(Generator, InfeasibleCycles) {
  // n=6 at 50:35:15 leaves a single Or node.
  EXPECT_EQ(planned_counts(params_for(6, 0, 1)).ors, 1u);
  EXPECT_BAG_ERROR(generate(params_for(6, 50, 1)), ErrorCode::Infeasible);
  EXPECT_NO_THROW(generate(params_for(6, 0, 1)));
}

TEST(Generator, SmallGraphsAreValid) {
  for (std::size_t n = 3; n <= 40; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const GenParams p = params_for(n, 0, seed);
      expect_wiring_contract(generate(p), p);
    }
  }
}

TEST(Bench, CartesianRowsAndCsv) {
  const auto rows = bench({60, 90}, {0, 100}, 2, 5);
  ASSERT_EQ(rows.size(), 8u);
  std::set<std::tuple<std::size_t, double, std::size_t>> cells;
  for (const auto& r : rows) {
    EXPECT_GE(r.wall_time_seconds, 0.0);
    cells.insert({r.n, r.cyclicity, r.replicate});
    if (r.cyclicity == 0) EXPECT_EQ(r.nodes_in_cycles, 0u);
    if (r.cyclicity == 100) EXPECT_GT(r.nodes_in_cycles, 0u);
  }
  EXPECT_EQ(cells.size(), 8u);
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  const std::string text = csv.str();
  EXPECT_EQ(text.rfind("n,cyclicity,replicate,wall_time_seconds,nodes_in_cycles\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Bench, GraphsReproducibleAcrossRuns) {
  const auto a = bench({80}, {25}, 3, 11);
  const auto b = bench({80}, {25}, 3, 11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].nodes_in_cycles, b[i].nodes_in_cycles);
  }
  EXPECT_EQ(bench_seed(11, 80, 25, 0), bench_seed(11, 80, 25, 0));
  EXPECT_NE(bench_seed(11, 80, 25, 0), bench_seed(11, 80, 25, 1));
}

TEST(Bench, RejectsZeroReplicates) {
  EXPECT_BAG_ERROR(bench({50}, {0}, 0, 1), ErrorCode::InvalidArgument);
}
