#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob {

struct GenParams {
  std::size_t n = 1000;
  double cyclicity = 0.0;                    // percent of Or nodes on cycles
  std::array<unsigned, 3> ratio{50, 35, 15};  // leaf : and : or, sums to 100
  std::uint64_t seed = 0;
  std::size_t max_parents = 4;
};

/// Leaf probability palette (the CVSS complexity probabilities).
inline constexpr std::array<double, 3> kLeafPalette{0.35, 0.61, 0.71};

struct NodeCounts {
  std::size_t leaves = 0, ands = 0, ors = 0;
};

/// Node counts implied by n and ratio (leaves and ands rounded to nearest,
/// ors take the remainder).
NodeCounts planned_counts(const GenParams& params);

/**
 * Random attack graph in layered MulVAL style. Base wiring is acyclic:
 * every And has at least one leaf parent plus Or parents from earlier in a
 * random topological sequence, every Or has And parents only. Cycles are
 * then closed with bridge And nodes (descendant Or -> bridge -> ancestor Or,
 * plus a leaf) until at least ceil(cyclicity% * |Or|) Or nodes sit on a
 * directed cycle; unused bridge budget becomes ordinary sink Ands. Leaves
 * draw from kLeafPalette, interior nodes get probability 1.
 *
 * Throws InvalidArgument for bad parameters, Infeasible when cycles are
 * requested with fewer than two Or nodes.
 */
AttackGraph generate(const GenParams& params);

/// Fraction (percent) of Or nodes lying on some directed cycle.
double achieved_cyclicity(const AttackGraph& graph);

/// Number of nodes lying on some directed cycle.
std::size_t nodes_in_cycles(const AttackGraph& graph);

struct BenchRow {
  std::size_t n = 0;
  double cyclicity = 0.0;
  std::size_t replicate = 0;
  double wall_time_seconds = 0.0;
  std::size_t nodes_in_cycles = 0;
};

struct BenchOptions {
  unsigned threads = 1;  // solve_all threads; timings only comparable at 1
};

/// Seed used for replicate r of (n, c) in bench().
std::uint64_t bench_seed(std::uint64_t seed, std::size_t n, double cyclicity,
                         std::size_t replicate);

/// Generate + time solve_all for every (n, c, replicate), in that nesting.
std::vector<BenchRow> bench(const std::vector<std::size_t>& sizes,
                            const std::vector<double>& cyclicities,
                            std::size_t replicates, std::uint64_t seed,
                            const BenchOptions& options = {});

/// CSV with header n,cyclicity,replicate,wall_time_seconds,nodes_in_cycles.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace bagprob
