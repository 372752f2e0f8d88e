#include "bagprob/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "bagprob/detail/lanes.hpp"

namespace bagprob {

namespace detail {

namespace {

constexpr Word kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

}  // namespace

InputSpace::InputSpace(const AttackGraph& graph)
    : constant(graph.size(), 0), rank(graph.size(), -1) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double p = graph.prob_at(i);
    if (p > 0.0 && p < 1.0) {
      rank[i] = static_cast<int>(fractional.size());
      fractional.push_back(i);
    } else {
      constant[i] = p >= 1.0 ? 1 : 0;
    }
  }
}

Word InputSpace::lane_mask(std::uint64_t) const noexcept {
  const std::uint64_t count = instantiations();
  return count >= kLanes ? ~Word{0} : (Word{1} << count) - 1;
}

void InputSpace::fill(std::uint64_t batch, std::vector<Word>& inputs) const {
  const Word mask = lane_mask(batch);
  inputs.resize(rank.size());
  for (std::size_t v = 0; v < rank.size(); ++v) {
    const int r = rank[v];
    Word w;
    if (r < 0) {
      w = constant[v] ? ~Word{0} : 0;
    } else if (r < 6) {
      w = kLanePattern[r];
    } else {
      w = ((batch >> (r - 6)) & 1u) ? ~Word{0} : 0;
    }
    inputs[v] = w & mask;
  }
}

LaneWeights::LaneWeights(const AttackGraph& graph, const InputSpace& space)
    : graph_(graph), space_(space), low_(kLanes, 1.0) {
  const std::size_t low_bits = std::min<std::size_t>(6, space.bits());
  for (std::size_t lane = 0; lane < kLanes; ++lane) {
    double w = 1.0;
    for (std::size_t r = 0; r < low_bits; ++r) {
      const double p = graph.prob_at(space.fractional[r]);
      w *= ((lane >> r) & 1u) ? p : 1.0 - p;
    }
    low_[lane] = w;
  }
}

double LaneWeights::high(std::uint64_t batch) const {
  double w = 1.0;
  for (std::size_t r = 6; r < space_.bits(); ++r) {
    const double p = graph_.prob_at(space_.fractional[r]);
    w *= ((batch >> (r - 6)) & 1u) ? p : 1.0 - p;
  }
  return w;
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

}  // namespace detail

AugmentedGraph::AugmentedGraph(AttackGraph base) : base_(std::move(base)) {
  base_.require_valid();
  const InputId first = base_.size() == 0 ? 0 : base_.id_at(base_.size() - 1) + 1;
  for (std::size_t i = 0; i < base_.size(); ++i) {
    primed_.emplace(base_.id_at(i), first + static_cast<InputId>(i));
  }
}

AugmentedGraph augment(const AttackGraph& graph) {
  return AugmentedGraph(graph);
}

Instantiation Instantiation::filled(const AugmentedGraph& aug, bool value) {
  return Instantiation{std::vector<bool>(aug.size(), value)};
}

void Instantiation::set(const AugmentedGraph& aug, NodeId v, bool value) {
  bits.at(aug.base().require_index(v)) = value;
}

bool Instantiation::get(const AugmentedGraph& aug, NodeId v) const {
  return bits.at(aug.base().require_index(v));
}

CircuitState CircuitState::zero(const AugmentedGraph& aug) {
  return CircuitState{std::vector<bool>(aug.size(), false), 0};
}

bool CircuitState::value(const AugmentedGraph& aug, NodeId v) const {
  return values.at(aug.base().require_index(v));
}

CircuitState step(const AugmentedGraph& aug, const CircuitState& state,
                  const Instantiation& inst) {
  const AttackGraph& g = aug.base();
  if (state.values.size() != g.size() || inst.bits.size() != g.size()) {
    throw BagError(ErrorCode::InvalidArgument,
                   "state or instantiation does not match the circuit");
  }
  CircuitState next{std::vector<bool>(g.size(), false), state.iteration + 1};
  for (std::size_t v = 0; v < g.size(); ++v) {
    bool out;
    auto parents = g.parents_at(v);
    if (aug.gate_at(v) == GateKind::Or) {
      out = std::any_of(parents.begin(), parents.end(),
                        [&](auto pa) { return state.values[pa]; });
    } else {
      out = std::all_of(parents.begin(), parents.end(),
                        [&](auto pa) { return state.values[pa]; });
    }
    next.values[v] = out && inst.bits[v];
  }
  return next;
}

FixedPoint fixed_point(const AugmentedGraph& aug, const Instantiation& inst) {
  CircuitState current = CircuitState::zero(aug);
  while (true) {
    CircuitState next = step(aug, current, inst);
    if (next.values == current.values) {
      const std::size_t k = current.iteration;
      if (k > aug.size()) {
        // Monotone 0/1 trajectories switch at least one node per step.
        throw BagError(ErrorCode::InvalidArgument,
                       "fixed point exceeded the node-count bound");
      }
      return {std::move(current), k};
    }
    current = std::move(next);
  }
}

std::string_view to_string(ReachMethod method) noexcept {
  return method == ReachMethod::Exact ? "exact" : "monte-carlo";
}

std::size_t fractional_input_count(const AttackGraph& graph) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double p = graph.prob_at(i);
    if (p > 0.0 && p < 1.0) ++count;
  }
  return count;
}

std::vector<double> reachability_exact_all(const AttackGraph& graph) {
  graph.require_valid();
  using namespace detail;
  const InputSpace space(graph);
  if (space.bits() > kMaxExactInputs) {
    throw BagError(ErrorCode::TooLarge,
                   std::to_string(space.bits()) +
                       " fractional inputs exceed the exact limit of " +
                       std::to_string(kMaxExactInputs));
  }
  const LaneWeights weights(graph, space);
  LaneCircuit circuit(graph);
  std::vector<CompensatedSum> totals(graph.size());
  std::vector<Word> inputs;
  for (std::uint64_t batch = 0; batch < space.batches(); ++batch) {
    space.fill(batch, inputs);
    circuit.run(inputs);
    const double high = weights.high(batch);
    auto final_state = circuit.state();
    for (std::size_t v = 0; v < graph.size(); ++v) {
      Word hits = final_state[v];
      if (!hits) continue;
      double partial = 0.0;
      while (hits) {
        partial += weights.low(static_cast<std::size_t>(std::countr_zero(hits)));
        hits &= hits - 1;
      }
      totals[v].add(high * partial);
    }
  }
  std::vector<double> out(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    out[v] = std::clamp(totals[v].value(), 0.0, 1.0);
  }
  return out;
}

ReachEstimate reachability_exact(const AttackGraph& graph, NodeId v) {
  graph.require_valid();
  const std::size_t index = graph.require_index(v);
  const auto all = reachability_exact_all(graph);
  return {all[index], ReachMethod::Exact,
          std::uint64_t{1} << fractional_input_count(graph), 0.0};
}

ReachEstimate reachability_mc(const AttackGraph& graph, NodeId v,
                              std::uint64_t samples, std::uint64_t seed) {
  graph.require_valid();
  const std::size_t index = graph.require_index(v);
  if (samples == 0) {
    throw BagError(ErrorCode::InvalidArgument, "samples must be at least 1");
  }
  using namespace detail;
  const InputSpace space(graph);
  LaneCircuit circuit(graph);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<Word> inputs(graph.size());
  std::uint64_t hits = 0;
  for (std::uint64_t done = 0; done < samples; done += kLanes) {
    const std::uint64_t lanes = std::min<std::uint64_t>(kLanes, samples - done);
    const Word mask = lanes == kLanes ? ~Word{0} : (Word{1} << lanes) - 1;
    for (std::size_t u = 0; u < graph.size(); ++u) {
      if (space.rank[u] < 0) {
        inputs[u] = space.constant[u] ? mask : 0;
        continue;
      }
      const double p = graph.prob_at(u);
      Word w = 0;
      for (std::uint64_t l = 0; l < lanes; ++l) {
        if (uniform() < p) w |= Word{1} << l;
      }
      inputs[u] = w;
    }
    circuit.run(inputs);
    hits += static_cast<std::uint64_t>(std::popcount(circuit.state()[index] & mask));
  }
  const double n = static_cast<double>(samples);
  const double p_hat = static_cast<double>(hits) / n;
  return {p_hat, ReachMethod::MonteCarlo, samples,
          std::sqrt(p_hat * (1.0 - p_hat) / n)};
}

}  // namespace bagprob
