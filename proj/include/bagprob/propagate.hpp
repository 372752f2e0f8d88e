#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob {

using ProbabilityMap = std::map<NodeId, double>;

/// Product of the inputs; 1 for an empty list.
double conjunction(std::span<const double> probs) noexcept;
/// 1 - prod(1 - p); 0 for an empty list.
double disjunction(std::span<const double> probs) noexcept;

/// Work counters for one solve_node call.
struct SolveStats {
  std::size_t expanded = 0;       // nodes entered (each at most once)
  std::size_t parent_checks = 0;  // parent slots inspected
};

/**
 * Cycle-tolerant recursive access probability of a single node.
 *
 * Starting from `v`, parents are explored depth first in ascending id order
 * with a visited set private to this call:
 *   - a parent equal to `v` (the origin) contributes 0;
 *   - an already visited interior parent contributes 0;
 *   - an already visited leaf contributes its local probability;
 *   - an unvisited parent is marked visited, then evaluated recursively.
 * And nodes multiply their contributions, Or nodes take 1 - prod(1 - c);
 * both then multiply by their own local probability. Leaves return their
 * local probability.
 *
 * Recursion runs on an explicit stack. Throws UnknownNode / InvalidGraph.
 */
double solve_node(const AttackGraph& graph, NodeId v,
                  SolveStats* stats = nullptr);

/// solve_node for every node. `threads` > 1 evaluates nodes concurrently;
/// the result is bit-identical for every thread count.
ProbabilityMap solve_all(const AttackGraph& graph, unsigned threads = 1);

/// solve_all by dense node index (ascending id order).
std::vector<double> solve_all_indexed(const AttackGraph& graph,
                                      unsigned threads = 1);

/// Single topological pass of the closed-form recursion; each node sees its
/// parents' access probabilities directly. Throws GraphCyclic.
ProbabilityMap solve_acyclic_closed_form(const AttackGraph& graph);
std::vector<double> solve_acyclic_closed_form_indexed(const AttackGraph& graph);

}  // namespace bagprob
