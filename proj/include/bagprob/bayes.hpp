#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob {

/// Dense table over Boolean variables. Bit i of a table index is the value
/// of scope[i]; scope is sorted ascending.
struct Factor {
  std::vector<NodeId> scope;
  std::vector<double> table;

  Factor() : table{1.0} {}
  Factor(std::vector<NodeId> scope, std::vector<double> table);

  std::size_t width() const noexcept { return scope.size(); }
  /// Position of `var` in scope, if present.
  std::optional<std::size_t> position(NodeId var) const noexcept;
};

/// Largest intermediate factor variable elimination will build.
inline constexpr std::size_t kMaxFactorWidth = 24;
/// CPTs with more parents than this are never materialized.
inline constexpr std::size_t kMaxCptParents = 20;

Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, NodeId var);

/// Conditional probability table of one variable, kept procedurally so a
/// wide And/Or node does not need 2^k rows until it is materialized.
struct Cpt {
  NodeId variable = 0;
  NodeKind kind = NodeKind::Leaf;
  double p = 1.0;
  std::vector<NodeId> parents;  // ascending

  /// Prob(variable = value | parents), parent values in `parents` order.
  double prob(bool value, const std::vector<bool>& parent_values) const;
  /// Table with scope {variable} ∪ parents. Throws WidthLimit.
  Factor factor() const;
};

struct BayesNet {
  std::vector<NodeId> variables;  // ascending
  std::vector<Edge> structure;
  std::map<NodeId, Cpt> cpts;

  bool contains(NodeId v) const noexcept { return cpts.count(v) != 0; }
};

/// Boolean network with leaf / And / Or tables. Throws GraphCyclic.
BayesNet to_bayes_net(const AttackGraph& graph);

/// Greedy min-degree ordering on the moral graph, ties to the smallest id.
std::vector<NodeId> elimination_order(const BayesNet& bn, NodeId query);

/// Prob(query = 1) by sum-product variable elimination. `order` must be a
/// permutation of the variables other than `query` (BadOrder otherwise);
/// defaults to elimination_order(). Throws WidthLimit on oversized factors.
double eliminate(const BayesNet& bn, NodeId query,
                 const std::optional<std::vector<NodeId>>& order = std::nullopt);

/// Exhaustive joint enumeration (zero-mass branches pruned). At most 24
/// variables, else TooLarge.
double brute_force_marginal(const BayesNet& bn, NodeId query);

}  // namespace bagprob
