#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob {

using InputId = std::uint32_t;

enum class GateKind { And, Or };

/**
 * Attack graph read as a synchronous Boolean circuit. Every node v gets a
 * fresh primed input v' wired as the last conjunct of its gate:
 *   leaf / And:  v(k+1) = v' ∧ ⋀ pa(v)(k)
 *   Or:          v(k+1) = v' ∧ ⋁ pa(v)(k)
 * Primed input ids are allocated above the largest node id.
 */
class AugmentedGraph {
 public:
  explicit AugmentedGraph(AttackGraph base);

  const AttackGraph& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }
  InputId primed(NodeId v) const { return primed_.at(v); }
  const std::map<NodeId, InputId>& primed_inputs() const noexcept {
    return primed_;
  }
  GateKind gate_at(std::size_t i) const noexcept {
    return base_.kind_at(i) == NodeKind::Or ? GateKind::Or : GateKind::And;
  }

 private:
  AttackGraph base_;
  std::map<NodeId, InputId> primed_;
};

AugmentedGraph augment(const AttackGraph& graph);

/// Values of the primed inputs, by node index (ascending node id).
struct Instantiation {
  std::vector<bool> bits;

  static Instantiation filled(const AugmentedGraph& aug, bool value);
  void set(const AugmentedGraph& aug, NodeId v, bool value);
  bool get(const AugmentedGraph& aug, NodeId v) const;
};

struct CircuitState {
  std::vector<bool> values;  // by node index
  std::size_t iteration = 0;

  static CircuitState zero(const AugmentedGraph& aug);
  bool value(const AugmentedGraph& aug, NodeId v) const;
};

/// One synchronous update of every gate from `state`.
CircuitState step(const AugmentedGraph& aug, const CircuitState& state,
                  const Instantiation& inst);

struct FixedPoint {
  CircuitState state;
  std::size_t k_star = 0;  // first k with v(k+1) = v(k)
};

/// Iterates step() from the all-zero state until nothing changes.
FixedPoint fixed_point(const AugmentedGraph& aug, const Instantiation& inst);

enum class ReachMethod { Exact, MonteCarlo };
std::string_view to_string(ReachMethod method) noexcept;

struct ReachEstimate {
  double probability = 0.0;
  ReachMethod method = ReachMethod::Exact;
  std::uint64_t samples = 0;
  double std_error = 0.0;
};

/// Largest number of fractional inputs reachability_exact enumerates.
inline constexpr std::size_t kMaxExactInputs = 24;

/// Number of nodes whose local probability lies strictly inside (0,1).
std::size_t fractional_input_count(const AttackGraph& graph);

/**
 * Prob{v(k) = 1 for some k} by enumerating the fractional primed inputs
 * (inputs with p = 0 or 1 are constants). Throws TooLarge past
 * kMaxExactInputs fractional inputs.
 */
ReachEstimate reachability_exact(const AttackGraph& graph, NodeId v);

/// reachability_exact for every node at once, by node index.
std::vector<double> reachability_exact_all(const AttackGraph& graph);

/// Monte Carlo estimate over i.i.d. instantiations; deterministic per seed.
ReachEstimate reachability_mc(const AttackGraph& graph, NodeId v,
                              std::uint64_t samples, std::uint64_t seed);

}  // namespace bagprob
