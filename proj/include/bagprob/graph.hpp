#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bagprob/error.hpp"

namespace bagprob {

using NodeId = std::uint32_t;

enum class NodeKind { Leaf, And, Or };

std::string_view to_string(NodeKind kind) noexcept;
std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept;

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Leaf;
  std::string label;
  double local_prob = 1.0;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Directed edge (parent, child).
struct Edge {
  NodeId parent = 0;
  NodeId child = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Issue {
  std::string code;  // e.g. "LEAF_HAS_PARENT"
  std::optional<NodeId> node;
  std::optional<Edge> edge;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const noexcept { return errors.empty(); }
  bool has_error(std::string_view code) const;
  bool has_warning(std::string_view code) const;
};

/**
 * Bayesian attack graph: typed nodes with local probabilities and directed
 * dependency edges. Cycles are allowed.
 *
 * The graph is immutable. Nodes are kept sorted by id and addressed
 * internally by a dense index in [0, size()); parent and child lists are
 * sorted ascending, so index order and id order agree everywhere.
 *
 * Construction never throws on malformed input. Malformed parts are kept in
 * the raw node/edge lists for validate() and left out of the adjacency;
 * algorithms call require_valid() before touching the structure.
 */
class AttackGraph {
 public:
  AttackGraph() = default;
  AttackGraph(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Nodes sorted ascending by id (duplicates retained for reporting).
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  /// Edges in ascending (parent, child) order (duplicates retained).
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool contains(NodeId id) const noexcept { return index_of(id).has_value(); }
  std::optional<std::size_t> index_of(NodeId id) const noexcept;
  /// Throws UnknownNode.
  std::size_t require_index(NodeId id) const;
  const Node& node(NodeId id) const { return nodes_[slot_[require_index(id)]]; }

  // Index-based access; indices follow ascending id order.
  NodeId id_at(std::size_t i) const noexcept { return ids_[i]; }
  NodeKind kind_at(std::size_t i) const noexcept { return kinds_[i]; }
  double prob_at(std::size_t i) const noexcept { return probs_[i]; }
  const std::string& label_at(std::size_t i) const noexcept {
    return nodes_[slot_[i]].label;
  }
  std::span<const std::uint32_t> parents_at(std::size_t i) const noexcept {
    return {parent_list_.data() + parent_off_[i],
            parent_list_.data() + parent_off_[i + 1]};
  }
  std::span<const std::uint32_t> children_at(std::size_t i) const noexcept {
    return {child_list_.data() + child_off_[i],
            child_list_.data() + child_off_[i + 1]};
  }

  std::vector<NodeId> parents(NodeId id) const;
  std::vector<NodeId> children(NodeId id) const;

  /// Validation outcome computed once at construction.
  const ValidationReport& report() const noexcept { return report_; }
  bool valid() const noexcept { return report_.ok(); }
  /// Throws InvalidGraph listing the first error.
  void require_valid() const;

  /// Same structure with different local probabilities (by index).
  AttackGraph with_probabilities(std::span<const double> probs) const;

  friend bool operator==(const AttackGraph& a, const AttackGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeId> ids_;          // unique ids ascending
  std::vector<std::size_t> slot_;    // index -> position in nodes_
  std::vector<NodeKind> kinds_;
  std::vector<double> probs_;
  std::vector<std::size_t> parent_off_{0};
  std::vector<std::uint32_t> parent_list_;
  std::vector<std::size_t> child_off_{0};
  std::vector<std::uint32_t> child_list_;
  ValidationReport report_;
};

/// Reports every violated structural invariant. Errors are data, never thrown.
ValidationReport validate(const AttackGraph& graph);

/// Simple directed cycle; nodes.front() == nodes.back().
struct CyclePath {
  std::vector<NodeId> nodes;

  std::size_t length() const noexcept {
    return nodes.empty() ? 0 : nodes.size() - 1;
  }
  /// Distinct members sorted ascending.
  std::vector<NodeId> node_set() const;

  friend bool operator==(const CyclePath&, const CyclePath&) = default;
};

inline constexpr std::size_t kDefaultMaxCycles = 10000;

/// Thrown by find_cycles when more than max_cycles simple cycles exist.
class CycleLimitError : public BagError {
 public:
  CycleLimitError(std::vector<CyclePath> partial, std::size_t limit);
  const std::vector<CyclePath>& partial() const noexcept { return partial_; }

 private:
  std::vector<CyclePath> partial_;
};

/**
 * All simple directed cycles (Johnson's algorithm, run per strongly
 * connected component). Each cycle starts and ends at its smallest node id;
 * cycles are ordered by that start node, then by depth-first discovery with
 * ascending successor ids. Throws CycleLimitError past max_cycles.
 */
std::vector<CyclePath> find_cycles(const AttackGraph& graph,
                                   std::size_t max_cycles = kDefaultMaxCycles);

/// True iff the undirected version of the graph is a forest.
bool is_loop_free(const AttackGraph& graph);

/// Kahn's algorithm with smallest-index-first tie breaking; empty optional
/// when the graph has a directed cycle. Returns node indices.
std::optional<std::vector<std::size_t>> topological_order(
    const AttackGraph& graph);

bool is_acyclic(const AttackGraph& graph);

/// Tarjan SCCs as lists of node indices; component order is unspecified
/// but each component is sorted ascending.
std::vector<std::vector<std::size_t>> strongly_connected_components(
    const AttackGraph& graph);

/// Per node index, whether it lies on some directed cycle.
std::vector<bool> on_cycle_mask(const AttackGraph& graph);

/// Plain (exploit/condition) attack graph with an individual score per node.
struct PlainBag {
  std::vector<NodeId> exploits;
  std::vector<NodeId> conditions;
  std::vector<Edge> require_edges;  // condition -> exploit
  std::vector<Edge> imply_edges;    // exploit -> condition
  std::map<NodeId, double> score;
  std::map<NodeId, std::string> labels;
};

/// Exploits become And nodes, conditions without implying exploits become
/// leaves, the remaining conditions become Or nodes. Throws PlainCycle on a
/// cyclic input and InvalidArgument on any other broken invariant.
AttackGraph convert_plain(const PlainBag& plain);

}  // namespace bagprob
