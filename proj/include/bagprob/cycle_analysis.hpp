#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bagprob/circuit.hpp"
#include "bagprob/graph.hpp"

namespace bagprob {

enum class CycleType { Type1, Type2, Type3 };
std::string_view to_string(CycleType type) noexcept;

/// Instantiation under which cycle node `node` is already on at step `k`,
/// one step before the target first turns on.
struct CycleWitness {
  Instantiation instantiation;
  NodeId node = 0;
  std::size_t k = 0;
};

struct CycleReport {
  CyclePath cycle;
  CycleType type = CycleType::Type1;
  std::optional<NodeId> target;
  std::optional<CycleWitness> witness;  // present for Type3
};

struct FirstHit {
  NodeId node = 0;
  std::optional<std::size_t> k_star_i;  // empty: never turns on
};

/// Fractional-input bound for classification (exhaustive enumeration).
inline constexpr std::size_t kMaxClassifyInputs = 20;

/// First step at which each node turns on while iterating to the fixed
/// point from the all-zero state.
std::vector<FirstHit> first_hit(const AugmentedGraph& aug,
                                const Instantiation& inst);

/**
 * Classifies `cycle` by exhaustive enumeration of the positive-probability
 * instantiations:
 *   Type1  some cycle node stays 0 at the fixed point under every one;
 *   Type2  whenever `target` turns on (first at step k), every cycle node
 *          was still 0 at step k-1;
 *   Type3  otherwise, with the first counterexample as witness.
 * Throws TooLarge past kMaxClassifyInputs fractional inputs and
 * TargetRequired when the cycle is not Type1 and no target is given.
 */
CycleReport classify_cycle(const AttackGraph& graph, const CyclePath& cycle,
                           std::optional<NodeId> target);

/// find_cycles followed by classify_cycle on each cycle.
std::vector<CycleReport> classify_all(
    const AttackGraph& graph, NodeId target,
    std::size_t max_cycles = kDefaultMaxCycles);

/**
 * The cycle edge whose head is the cycle node that turns on first under the
 * all-ones instantiation (ties and never-on nodes resolved by smallest id).
 * Removing it is the edge-removal check for Type2 vs Type3 cycles.
 */
Edge closing_edge(const AttackGraph& graph, const CyclePath& cycle);

/// Copy of `graph` without `edge`.
AttackGraph without_edge(const AttackGraph& graph, const Edge& edge);

}  // namespace bagprob
