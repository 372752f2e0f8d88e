#include "bagprob/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bagprob {

Factor::Factor(std::vector<NodeId> s, std::vector<double> t)
    : scope(std::move(s)), table(std::move(t)) {
  if (!std::is_sorted(scope.begin(), scope.end()) ||
      std::adjacent_find(scope.begin(), scope.end()) != scope.end()) {
    throw BagError(ErrorCode::InvalidArgument,
                   "factor scope must be strictly ascending");
  }
  if (table.size() != (std::size_t{1} << scope.size())) {
    throw BagError(ErrorCode::InvalidArgument,
                   "factor table size must be 2^|scope|");
  }
  for (double x : table) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw BagError(ErrorCode::InvalidArgument,
                     "factor entries must be finite and non-negative");
    }
  }
}

std::optional<std::size_t> Factor::position(NodeId var) const noexcept {
  auto it = std::lower_bound(scope.begin(), scope.end(), var);
  if (it == scope.end() || *it != var) return std::nullopt;
  return static_cast<std::size_t>(it - scope.begin());
}

namespace {

void check_width(std::size_t width) {
  if (width > kMaxFactorWidth) {
    throw BagError(ErrorCode::WidthLimit,
                   "factor over " + std::to_string(width) +
                       " variables exceeds the limit of " +
                       std::to_string(kMaxFactorWidth));
  }
}

// For each variable of `scope`, the bit it maps to in `sub`'s index (or -1).
std::vector<int> bit_map(const std::vector<NodeId>& scope, const Factor& sub) {
  std::vector<int> map(scope.size(), -1);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (auto pos = sub.position(scope[i])) map[i] = static_cast<int>(*pos);
  }
  return map;
}

std::size_t project(std::size_t index, const std::vector<int>& map) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] >= 0 && ((index >> i) & 1u)) out |= std::size_t{1} << map[i];
  }
  return out;
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b) {
  std::vector<NodeId> scope;
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(),
                 b.scope.end(), std::back_inserter(scope));
  check_width(scope.size());
  const auto map_a = bit_map(scope, a);
  const auto map_b = bit_map(scope, b);
  std::vector<double> table(std::size_t{1} << scope.size());
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    table[idx] = a.table[project(idx, map_a)] * b.table[project(idx, map_b)];
  }
  return Factor(std::move(scope), std::move(table));
}

Factor sum_out(const Factor& f, NodeId var) {
  auto pos = f.position(var);
  if (!pos) return f;
  std::vector<NodeId> scope = f.scope;
  scope.erase(scope.begin() + static_cast<std::ptrdiff_t>(*pos));
  std::vector<double> table(std::size_t{1} << scope.size(), 0.0);
  const std::size_t low_mask = (std::size_t{1} << *pos) - 1;
  for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
    const std::size_t reduced =
        (idx & low_mask) | ((idx >> (*pos + 1)) << *pos);
    table[reduced] += f.table[idx];
  }
  return Factor(std::move(scope), std::move(table));
}

double Cpt::prob(bool value, const std::vector<bool>& parent_values) const {
  bool enabled = true;
  if (kind == NodeKind::And) {
    enabled = std::all_of(parent_values.begin(), parent_values.end(),
                          [](bool b) { return b; });
  } else if (kind == NodeKind::Or) {
    enabled = std::any_of(parent_values.begin(), parent_values.end(),
                          [](bool b) { return b; });
  }
  const double p_true = enabled ? p : 0.0;
  return value ? p_true : 1.0 - p_true;
}

Factor Cpt::factor() const {
  if (parents.size() > kMaxCptParents) {
    throw BagError(ErrorCode::WidthLimit,
                   "node " + std::to_string(variable) + " has " +
                       std::to_string(parents.size()) + " parents (limit " +
                       std::to_string(kMaxCptParents) + ")");
  }
  std::vector<NodeId> scope = parents;
  scope.push_back(variable);
  std::sort(scope.begin(), scope.end());
  Factor f(scope, std::vector<double>(std::size_t{1} << scope.size()));
  const std::size_t self = *f.position(variable);
  std::vector<std::size_t> parent_bits;
  for (auto pa : parents) parent_bits.push_back(*f.position(pa));
  std::vector<bool> values(parents.size());
  for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
    for (std::size_t k = 0; k < parent_bits.size(); ++k) {
      values[k] = (idx >> parent_bits[k]) & 1u;
    }
    f.table[idx] = prob((idx >> self) & 1u, values);
  }
  return f;
}

BayesNet to_bayes_net(const AttackGraph& graph) {
  graph.require_valid();
  if (!is_acyclic(graph)) {
    throw BagError(ErrorCode::GraphCyclic,
                   "Bayesian network translation needs an acyclic graph");
  }
  BayesNet bn;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    Cpt cpt;
    cpt.variable = graph.id_at(i);
    cpt.kind = graph.kind_at(i);
    cpt.p = graph.prob_at(i);
    for (auto pa : graph.parents_at(i)) {
      cpt.parents.push_back(graph.id_at(pa));
      bn.structure.push_back({graph.id_at(pa), cpt.variable});
    }
    bn.variables.push_back(cpt.variable);
    bn.cpts.emplace(cpt.variable, std::move(cpt));
  }
  std::sort(bn.structure.begin(), bn.structure.end());
  return bn;
}

namespace {

void require_variable(const BayesNet& bn, NodeId v) {
  if (!bn.contains(v)) {
    throw BagError(ErrorCode::UnknownNode,
                   "variable " + std::to_string(v) + " is not in the network");
  }
}

}  // namespace

std::vector<NodeId> elimination_order(const BayesNet& bn, NodeId query) {
  require_variable(bn, query);
  std::map<NodeId, std::set<NodeId>> adj;
  for (auto v : bn.variables) adj[v];
  for (const auto& [v, cpt] : bn.cpts) {
    std::vector<NodeId> family = cpt.parents;
    family.push_back(v);
    for (auto a : family) {
      for (auto b : family) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  std::vector<NodeId> order;
  std::set<NodeId> remaining(bn.variables.begin(), bn.variables.end());
  remaining.erase(query);
  while (!remaining.empty()) {
    NodeId best = *remaining.begin();
    std::size_t best_degree = adj[best].size();
    for (auto v : remaining) {
      if (adj[v].size() < best_degree) {
        best = v;
        best_degree = adj[v].size();
      }
    }
    const std::set<NodeId> neighbours = adj[best];
    for (auto a : neighbours) {
      adj[a].erase(best);
      for (auto b : neighbours) {
        if (a != b) adj[a].insert(b);
      }
    }
    adj.erase(best);
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

double eliminate(const BayesNet& bn, NodeId query,
                 const std::optional<std::vector<NodeId>>& order) {
  require_variable(bn, query);
  std::vector<NodeId> sequence =
      order ? *order : elimination_order(bn, query);
  {
    std::vector<NodeId> sorted = sequence;
    std::sort(sorted.begin(), sorted.end());
    std::vector<NodeId> expected;
    for (auto v : bn.variables) {
      if (v != query) expected.push_back(v);
    }
    if (sorted != expected) {
      throw BagError(ErrorCode::BadOrder,
                     "elimination order must list every variable except the "
                     "query exactly once");
    }
  }

  std::vector<Factor> factors;
  factors.reserve(bn.cpts.size());
  for (const auto& [v, cpt] : bn.cpts) factors.push_back(cpt.factor());

  for (NodeId var : sequence) {
    Factor product;
    std::vector<Factor> kept;
    kept.reserve(factors.size());
    bool touched = false;
    for (auto& f : factors) {
      if (f.position(var)) {
        product = touched ? multiply(product, f) : std::move(f);
        touched = true;
      } else {
        kept.push_back(std::move(f));
      }
    }
    if (touched) kept.push_back(sum_out(product, var));
    factors = std::move(kept);
  }

  Factor result;
  for (const auto& f : factors) result = multiply(result, f);
  if (result.scope != std::vector<NodeId>{query}) {
    throw BagError(ErrorCode::InvalidArgument,
                   "elimination left an unexpected scope");
  }
  const double total = result.table[0] + result.table[1];
  return total > 0.0 ? result.table[1] / total : 0.0;
}

double brute_force_marginal(const BayesNet& bn, NodeId query) {
  require_variable(bn, query);
  const std::size_t n = bn.variables.size();
  if (n > 24) {
    throw BagError(ErrorCode::TooLarge,
                   "brute-force enumeration is limited to 24 variables, got " +
                       std::to_string(n));
  }
  // Assign in topological order so each CPT row is known when reached.
  std::map<NodeId, std::size_t> slot;
  for (std::size_t i = 0; i < n; ++i) slot[bn.variables[i]] = i;
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> kids(n);
  for (const auto& [v, cpt] : bn.cpts) {
    indegree[slot[v]] = cpt.parents.size();
    for (auto pa : cpt.parents) kids[slot.at(pa)].push_back(slot[v]);
  }
  std::vector<std::size_t> topo;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) topo.push_back(i);
  }
  for (std::size_t head = 0; head < topo.size(); ++head) {
    for (auto c : kids[topo[head]]) {
      if (--indegree[c] == 0) topo.push_back(c);
    }
  }
  if (topo.size() != n) {
    throw BagError(ErrorCode::GraphCyclic, "network structure is cyclic");
  }

  std::vector<const Cpt*> cpt_of(n);
  std::vector<std::vector<std::size_t>> parent_slots(n);
  for (std::size_t i = 0; i < n; ++i) {
    cpt_of[i] = &bn.cpts.at(bn.variables[i]);
    for (auto pa : cpt_of[i]->parents) parent_slots[i].push_back(slot.at(pa));
  }
  const std::size_t query_slot = slot.at(query);

  std::vector<bool> assignment(n, false);
  double mass = 0.0;
  // Depth-first over topo positions; each level fixes one variable.
  auto recurse = [&](auto&& self, std::size_t depth, double weight) -> void {
    if (weight == 0.0) return;
    if (depth == n) {
      if (assignment[query_slot]) mass += weight;
      return;
    }
    const std::size_t v = topo[depth];
    std::vector<bool> values;
    values.reserve(parent_slots[v].size());
    for (auto pa : parent_slots[v]) values.push_back(assignment[pa]);
    for (bool value : {false, true}) {
      assignment[v] = value;
      self(self, depth + 1, weight * cpt_of[v]->prob(value, values));
    }
    assignment[v] = false;
  };
  recurse(recurse, 0, 1.0);
  return mass;
}

}  // namespace bagprob
