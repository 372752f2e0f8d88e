#include "bagprob/cycle_analysis.hpp"

#include <algorithm>
#include <bit>

#include "bagprob/detail/lanes.hpp"

namespace bagprob {

std::string_view to_string(CycleType type) noexcept {
  switch (type) {
    case CycleType::Type1: return "type1";
    case CycleType::Type2: return "type2";
    case CycleType::Type3: return "type3";
  }
  return "?";
}

std::vector<FirstHit> first_hit(const AugmentedGraph& aug,
                                const Instantiation& inst) {
  const AttackGraph& g = aug.base();
  std::vector<FirstHit> hits(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) hits[i].node = g.id_at(i);
  CircuitState current = CircuitState::zero(aug);
  while (true) {
    CircuitState next = step(aug, current, inst);
    if (next.values == current.values) break;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (next.values[i] && !hits[i].k_star_i) hits[i].k_star_i = next.iteration;
    }
    current = std::move(next);
  }
  return hits;
}

namespace {

std::vector<std::size_t> cycle_indices(const AttackGraph& graph,
                                       const CyclePath& cycle) {
  if (cycle.nodes.size() < 3 || cycle.nodes.front() != cycle.nodes.back()) {
    throw BagError(ErrorCode::InvalidArgument,
                   "a cycle path needs at least two nodes and must be closed");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < cycle.nodes.size(); ++i) {
    const std::size_t from = graph.require_index(cycle.nodes[i]);
    const std::size_t to = graph.require_index(cycle.nodes[i + 1]);
    auto kids = graph.children_at(from);
    if (!std::binary_search(kids.begin(), kids.end(), to)) {
      throw BagError(ErrorCode::InvalidArgument,
                     "cycle step " + std::to_string(cycle.nodes[i]) + "->" +
                         std::to_string(cycle.nodes[i + 1]) +
                         " is not an edge");
    }
    out.push_back(from);
  }
  return out;
}

Instantiation instantiation_for(const AttackGraph& graph,
                                const detail::InputSpace& space,
                                std::uint64_t index) {
  Instantiation inst{std::vector<bool>(graph.size(), false)};
  for (std::size_t v = 0; v < graph.size(); ++v) {
    inst.bits[v] = space.rank[v] < 0
                       ? space.constant[v] != 0
                       : ((index >> space.rank[v]) & 1u) != 0;
  }
  return inst;
}

}  // namespace

CycleReport classify_cycle(const AttackGraph& graph, const CyclePath& cycle,
                           std::optional<NodeId> target) {
  graph.require_valid();
  using namespace detail;
  const auto members = cycle_indices(graph, cycle);
  std::optional<std::size_t> target_index;
  if (target) target_index = graph.require_index(*target);

  const InputSpace space(graph);
  if (space.bits() > kMaxClassifyInputs) {
    throw BagError(ErrorCode::TooLarge,
                   std::to_string(space.bits()) +
                       " fractional inputs exceed the classification limit of " +
                       std::to_string(kMaxClassifyInputs));
  }

  std::vector<Word> ever_on(members.size(), 0);
  std::optional<CycleWitness> witness;
  LaneCircuit circuit(graph);
  std::vector<Word> inputs;
  for (std::uint64_t batch = 0; batch < space.batches(); ++batch) {
    space.fill(batch, inputs);
    circuit.run(inputs, [&](std::size_t k, std::span<const Word> prev,
                            std::span<const Word> cur) {
      if (!target_index || witness) return;
      const Word first_on = cur[*target_index] & ~prev[*target_index];
      if (!first_on) return;
      Word early = 0;
      for (auto m : members) early |= prev[m];
      const Word violated = first_on & early;
      if (!violated) return;
      const auto lane = static_cast<std::size_t>(std::countr_zero(violated));
      NodeId node = 0;
      bool found = false;
      for (auto m : members) {
        if ((prev[m] >> lane) & 1u) {
          if (!found || graph.id_at(m) < node) node = graph.id_at(m);
          found = true;
        }
      }
      witness = CycleWitness{
          instantiation_for(graph, space, batch * kLanes + lane), node, k - 1};
    });
    auto final_state = circuit.state();
    for (std::size_t j = 0; j < members.size(); ++j) {
      ever_on[j] |= final_state[members[j]];
    }
  }

  CycleReport report{cycle, CycleType::Type1, target, std::nullopt};
  const bool dead = std::any_of(ever_on.begin(), ever_on.end(),
                                [](Word w) { return w == 0; });
  if (dead) return report;
  if (!target) {
    throw BagError(ErrorCode::TargetRequired,
                   "cycle is not Type1; a target node is needed to decide "
                   "between Type2 and Type3");
  }
  if (witness) {
    report.type = CycleType::Type3;
    report.witness = std::move(witness);
  } else {
    report.type = CycleType::Type2;
  }
  return report;
}

std::vector<CycleReport> classify_all(const AttackGraph& graph, NodeId target,
                                      std::size_t max_cycles) {
  std::vector<CycleReport> out;
  for (const auto& cycle : find_cycles(graph, max_cycles)) {
    out.push_back(classify_cycle(graph, cycle, target));
  }
  return out;
}

Edge closing_edge(const AttackGraph& graph, const CyclePath& cycle) {
  graph.require_valid();
  cycle_indices(graph, cycle);
  const AugmentedGraph aug(graph);
  const auto hits = first_hit(aug, Instantiation::filled(aug, true));
  std::size_t best = 1;  // position in cycle.nodes of the chosen head
  for (std::size_t pos = 1; pos < cycle.nodes.size(); ++pos) {
    const auto& a = hits[graph.require_index(cycle.nodes[pos])];
    const auto& b = hits[graph.require_index(cycle.nodes[best])];
    const bool a_on = a.k_star_i.has_value(), b_on = b.k_star_i.has_value();
    bool better;
    if (a_on != b_on) {
      better = a_on;
    } else if (a_on && *a.k_star_i != *b.k_star_i) {
      better = *a.k_star_i < *b.k_star_i;
    } else {
      better = cycle.nodes[pos] < cycle.nodes[best];
    }
    if (better) best = pos;
  }
  return {cycle.nodes[best - 1], cycle.nodes[best]};
}

AttackGraph without_edge(const AttackGraph& graph, const Edge& edge) {
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) {
    if (e != edge) edges.push_back(e);
  }
  return AttackGraph(graph.nodes(), std::move(edges));
}

}  // namespace bagprob
