#include "bagprob/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

namespace bagprob {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGraph: return "INVALID_GRAPH";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::UnknownNode: return "UNKNOWN_NODE";
    case ErrorCode::GraphCyclic: return "GRAPH_CYCLIC";
    case ErrorCode::PlainCycle: return "PLAIN_CYCLE";
    case ErrorCode::CycleLimitExceeded: return "CYCLE_LIMIT_EXCEEDED";
    case ErrorCode::TooLarge: return "TOO_LARGE";
    case ErrorCode::BadOrder: return "BAD_ORDER";
    case ErrorCode::WidthLimit: return "WIDTH_LIMIT";
    case ErrorCode::TargetRequired: return "TARGET_REQUIRED";
    case ErrorCode::Infeasible: return "INFEASIBLE";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
  }
  return "UNKNOWN";
}

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Leaf: return "leaf";
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept {
  if (text == "leaf") return NodeKind::Leaf;
  if (text == "and") return NodeKind::And;
  if (text == "or") return NodeKind::Or;
  return std::nullopt;
}

bool ValidationReport::has_error(std::string_view code) const {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const Issue& i) { return i.code == code; });
}

bool ValidationReport::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const Issue& i) { return i.code == code; });
}

AttackGraph::AttackGraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(edges_.begin(), edges_.end());

  for (std::size_t pos = 0; pos < nodes_.size(); ++pos) {
    if (!ids_.empty() && ids_.back() == nodes_[pos].id) continue;
    ids_.push_back(nodes_[pos].id);
    slot_.push_back(pos);
    kinds_.push_back(nodes_[pos].kind);
    probs_.push_back(nodes_[pos].local_prob);
  }

  const std::size_t n = ids_.size();
  std::vector<std::vector<std::uint32_t>> parents(n), children(n);
  const Edge* previous = nullptr;
  for (const Edge& e : edges_) {
    const bool duplicate = previous != nullptr && *previous == e;
    previous = &e;
    if (duplicate || e.parent == e.child) continue;
    auto p = index_of(e.parent);
    auto c = index_of(e.child);
    if (!p || !c) continue;
    parents[*c].push_back(static_cast<std::uint32_t>(*p));
    children[*p].push_back(static_cast<std::uint32_t>(*c));
  }
  for (std::size_t i = 0; i < n; ++i) {
    // edges_ is sorted by parent, so children are already ascending
    std::sort(parents[i].begin(), parents[i].end());
    parent_list_.insert(parent_list_.end(), parents[i].begin(),
                        parents[i].end());
    parent_off_.push_back(parent_list_.size());
    child_list_.insert(child_list_.end(), children[i].begin(),
                       children[i].end());
    child_off_.push_back(child_list_.size());
  }
  report_ = validate(*this);
}

std::optional<std::size_t> AttackGraph::index_of(NodeId id) const noexcept {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::size_t AttackGraph::require_index(NodeId id) const {
  auto i = index_of(id);
  if (!i) {
    throw BagError(ErrorCode::UnknownNode,
                   "node " + std::to_string(id) + " is not in the graph");
  }
  return *i;
}

std::vector<NodeId> AttackGraph::parents(NodeId id) const {
  std::vector<NodeId> out;
  for (auto p : parents_at(require_index(id))) out.push_back(ids_[p]);
  return out;
}

std::vector<NodeId> AttackGraph::children(NodeId id) const {
  std::vector<NodeId> out;
  for (auto c : children_at(require_index(id))) out.push_back(ids_[c]);
  return out;
}

void AttackGraph::require_valid() const {
  if (report_.ok()) return;
  const Issue& first = report_.errors.front();
  throw BagError(ErrorCode::InvalidGraph,
                 first.code + ": " + first.message + " (" +
                     std::to_string(report_.errors.size()) + " error(s))");
}

AttackGraph AttackGraph::with_probabilities(
    std::span<const double> probs) const {
  if (probs.size() != size()) {
    throw BagError(ErrorCode::InvalidArgument,
                   "probability vector does not match node count");
  }
  std::vector<Node> nodes;
  nodes.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    Node n = nodes_[slot_[i]];
    n.local_prob = probs[i];
    nodes.push_back(std::move(n));
  }
  return AttackGraph(std::move(nodes), edges_);
}

ValidationReport validate(const AttackGraph& graph) {
  ValidationReport report;
  auto error = [&](std::string code, std::optional<NodeId> node,
                   std::optional<Edge> edge, std::string message) {
    report.errors.push_back(
        {std::move(code), node, edge, std::move(message)});
  };

  const auto& nodes = graph.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (i > 0 && nodes[i - 1].id == n.id) {
      error("DUPLICATE_NODE", n.id, std::nullopt,
            "node id " + std::to_string(n.id) + " appears more than once");
    }
    if (!(n.local_prob >= 0.0 && n.local_prob <= 1.0)) {
      std::ostringstream msg;
      msg << "node " << n.id << " local probability " << n.local_prob
          << " is outside [0,1]";
      error("PROB_OUT_OF_RANGE", n.id, std::nullopt, msg.str());
    }
  }

  const auto& edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const std::string text =
        std::to_string(e.parent) + "->" + std::to_string(e.child);
    if (i > 0 && edges[i - 1] == e) {
      error("DUPLICATE_EDGE", std::nullopt, e, "edge " + text + " repeated");
      continue;
    }
    if (!graph.contains(e.parent) || !graph.contains(e.child)) {
      error("DANGLING_EDGE", std::nullopt, e,
            "edge " + text + " references a missing node");
      continue;
    }
    if (e.parent == e.child) {
      error("SELF_EDGE", e.parent, e, "self edge " + text);
      continue;
    }
    if (graph.node(e.child).kind == NodeKind::Leaf) {
      error("LEAF_HAS_PARENT", e.child, e,
            "leaf " + std::to_string(e.child) + " has incoming edge " + text);
    }
  }

  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.kind_at(i) != NodeKind::Leaf && graph.parents_at(i).empty()) {
      report.warnings.push_back(
          {"EMPTY_PARENTS", graph.id_at(i), std::nullopt,
           std::string(to_string(graph.kind_at(i))) + " node " +
               std::to_string(graph.id_at(i)) + " has no parents"});
    }
  }
  return report;
}

std::vector<NodeId> CyclePath::node_set() const {
  std::vector<NodeId> out(nodes.begin(),
                          nodes.empty() ? nodes.end() : nodes.end() - 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CycleLimitError::CycleLimitError(std::vector<CyclePath> partial,
                                 std::size_t limit)
    : BagError(ErrorCode::CycleLimitExceeded,
               "more than " + std::to_string(limit) + " simple cycles"),
      partial_(std::move(partial)) {}

std::vector<std::vector<std::size_t>> strongly_connected_components(
    const AttackGraph& graph) {
  // Iterative Tarjan.
  const std::size_t n = graph.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child)
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      auto kids = graph.children_at(v);
      if (next < kids.size()) {
        std::size_t w = kids[next++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().first] = std::min(low[call.back().first], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  return components;
}

std::vector<bool> on_cycle_mask(const AttackGraph& graph) {
  std::vector<bool> mask(graph.size(), false);
  for (const auto& comp : strongly_connected_components(graph)) {
    if (comp.size() > 1) {
      for (auto i : comp) mask[i] = true;
    }
  }
  return mask;
}

std::optional<std::vector<std::size_t>> topological_order(
    const AttackGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> indegree(n);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>>
      ready;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = graph.parents_at(i).size();
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto c : graph.children_at(v)) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

bool is_acyclic(const AttackGraph& graph) {
  return topological_order(graph).has_value();
}

namespace {

// Johnson's circuit search restricted to `allowed` (a strongly connected
// vertex set containing start, all members >= start).
class CircuitSearch {
 public:
  CircuitSearch(const AttackGraph& graph, std::size_t max_cycles,
                std::vector<CyclePath>& out)
      : graph_(graph),
        max_(max_cycles),
        out_(out),
        allowed_(graph.size(), false),
        blocked_(graph.size(), false),
        blocked_by_(graph.size()) {}

  void run(std::size_t start, const std::vector<std::size_t>& members) {
    for (auto v : members) {
      allowed_[v] = true;
      blocked_[v] = false;
      blocked_by_[v].clear();
    }
    search(start);
    for (auto v : members) allowed_[v] = false;
  }

 private:
  struct Frame {
    std::size_t v;
    std::size_t next = 0;
    bool found = false;
  };

  void search(std::size_t start) {
    std::vector<Frame> frames;
    std::vector<std::size_t> path;
    auto enter = [&](std::size_t v) {
      frames.push_back({v});
      path.push_back(v);
      blocked_[v] = true;
    };
    enter(start);
    while (!frames.empty()) {
      Frame& f = frames.back();
      auto kids = graph_.children_at(f.v);
      if (f.next < kids.size()) {
        std::size_t w = kids[f.next++];
        if (!allowed_[w]) continue;
        if (w == start) {
          emit(path, start);
          f.found = true;
        } else if (!blocked_[w]) {
          enter(w);
        }
        continue;
      }
      const Frame done = f;
      frames.pop_back();
      path.pop_back();
      if (done.found) {
        unblock(done.v);
      } else {
        for (auto w : graph_.children_at(done.v)) {
          if (!allowed_[w]) continue;
          auto& list = blocked_by_[w];
          if (std::find(list.begin(), list.end(), done.v) == list.end()) {
            list.push_back(done.v);
          }
        }
      }
      if (!frames.empty() && done.found) frames.back().found = true;
    }
  }

  void unblock(std::size_t v) {
    std::vector<std::size_t> work{v};
    while (!work.empty()) {
      std::size_t u = work.back();
      work.pop_back();
      if (!blocked_[u]) continue;
      blocked_[u] = false;
      for (auto w : blocked_by_[u]) work.push_back(w);
      blocked_by_[u].clear();
    }
  }

  void emit(const std::vector<std::size_t>& path, std::size_t start) {
    if (out_.size() >= max_) throw CycleLimitError(out_, max_);
    CyclePath cycle;
    cycle.nodes.reserve(path.size() + 1);
    for (auto v : path) cycle.nodes.push_back(graph_.id_at(v));
    cycle.nodes.push_back(graph_.id_at(start));
    out_.push_back(std::move(cycle));
  }

  const AttackGraph& graph_;
  std::size_t max_;
  std::vector<CyclePath>& out_;
  std::vector<bool> allowed_;
  std::vector<bool> blocked_;
  std::vector<std::vector<std::size_t>> blocked_by_;
};

// Strongly connected component of `start` inside the subgraph induced by
// `members` (sorted).
std::vector<std::size_t> component_of(const AttackGraph& graph,
                                      std::size_t start,
                                      const std::vector<std::size_t>& members,
                                      std::vector<char>& scratch) {
  for (auto v : members) scratch[v] = 1;
  auto reach = [&](bool forward) {
    std::vector<char> seen(graph.size(), 0);
    std::vector<std::size_t> work{start};
    seen[start] = 1;
    while (!work.empty()) {
      std::size_t v = work.back();
      work.pop_back();
      auto next = forward ? graph.children_at(v) : graph.parents_at(v);
      for (auto w : next) {
        if (scratch[w] && !seen[w]) {
          seen[w] = 1;
          work.push_back(w);
        }
      }
    }
    return seen;
  };
  auto fwd = reach(true);
  auto bwd = reach(false);
  std::vector<std::size_t> comp;
  for (auto v : members) {
    if (fwd[v] && bwd[v]) comp.push_back(v);
  }
  for (auto v : members) scratch[v] = 0;
  return comp;
}

}  // namespace

std::vector<CyclePath> find_cycles(const AttackGraph& graph,
                                   std::size_t max_cycles) {
  graph.require_valid();
  std::vector<CyclePath> out;
  auto components = strongly_connected_components(graph);
  std::sort(components.begin(), components.end());
  CircuitSearch search(graph, max_cycles, out);
  std::vector<char> scratch(graph.size(), 0);

  // Cycles from different components are interleaved by start node so the
  // output order depends only on node ids.
  std::vector<std::pair<std::size_t, const std::vector<std::size_t>*>> starts;
  for (const auto& comp : components) {
    if (comp.size() < 2) continue;
    for (auto s : comp) starts.emplace_back(s, &comp);
  }
  std::sort(starts.begin(), starts.end());
  for (const auto& [s, comp] : starts) {
    std::vector<std::size_t> members(std::lower_bound(comp->begin(),
                                                      comp->end(), s),
                                     comp->end());
    auto sub = component_of(graph, s, members, scratch);
    if (sub.size() < 2) continue;
    search.run(s, sub);
  }
  return out;
}

bool is_loop_free(const AttackGraph& graph) {
  graph.require_valid();
  std::vector<std::size_t> parent(graph.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t v = 0; v < graph.size(); ++v) {
    for (auto p : graph.parents_at(v)) {
      auto a = find(v), b = find(p);
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

AttackGraph convert_plain(const PlainBag& plain) {
  auto fail = [](const std::string& msg) {
    throw BagError(ErrorCode::InvalidArgument, msg);
  };
  std::map<NodeId, bool> is_exploit;
  for (auto e : plain.exploits) {
    if (!is_exploit.emplace(e, true).second) {
      fail("node " + std::to_string(e) + " listed twice");
    }
  }
  for (auto c : plain.conditions) {
    if (!is_exploit.emplace(c, false).second) {
      fail("node " + std::to_string(c) +
           " is listed twice or as both exploit and condition");
    }
  }
  auto kind_of = [&](NodeId id) -> bool {
    auto it = is_exploit.find(id);
    if (it == is_exploit.end()) {
      fail("edge references unknown node " + std::to_string(id));
    }
    return it->second;
  };
  std::map<NodeId, std::size_t> implied_by;
  for (const Edge& e : plain.require_edges) {
    if (kind_of(e.parent) || !kind_of(e.child)) {
      fail("require edge " + std::to_string(e.parent) + "->" +
           std::to_string(e.child) + " is not condition->exploit");
    }
  }
  for (const Edge& e : plain.imply_edges) {
    if (!kind_of(e.parent) || kind_of(e.child)) {
      fail("imply edge " + std::to_string(e.parent) + "->" +
           std::to_string(e.child) + " is not exploit->condition");
    }
    ++implied_by[e.child];
  }

  std::vector<Node> nodes;
  for (const auto& [id, exploit] : is_exploit) {
    auto score = plain.score.find(id);
    double p = score == plain.score.end() ? 1.0 : score->second;
    if (!(p >= 0.0 && p <= 1.0)) {
      fail("score of node " + std::to_string(id) + " is outside [0,1]");
    }
    NodeKind kind = exploit                 ? NodeKind::And
                    : implied_by.count(id)  ? NodeKind::Or
                                            : NodeKind::Leaf;
    auto label = plain.labels.find(id);
    nodes.push_back({id, kind,
                     label == plain.labels.end() ? std::string() : label->second,
                     p});
  }
  std::vector<Edge> edges = plain.require_edges;
  edges.insert(edges.end(), plain.imply_edges.begin(), plain.imply_edges.end());
  AttackGraph graph(std::move(nodes), std::move(edges));
  if (!graph.valid()) graph.require_valid();
  if (!is_acyclic(graph)) {
    throw BagError(ErrorCode::PlainCycle, "plain attack graph has a cycle");
  }
  return graph;
}

}  // namespace bagprob
