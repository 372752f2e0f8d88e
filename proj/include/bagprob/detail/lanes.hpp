#pragma once

// Bit-sliced circuit simulation: 64 instantiations run side by side, one per
// bit of a machine word. Shared by the circuit and cycle-analysis modules.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob::detail {

using Word = std::uint64_t;
inline constexpr std::size_t kLanes = 64;

/// Primed inputs split into constants (p = 0 or 1) and enumerated bits.
struct InputSpace {
  std::vector<std::uint8_t> constant;  // by node index; used when rank < 0
  std::vector<int> rank;               // fractional rank or -1
  std::vector<std::size_t> fractional; // node indices, ascending

  explicit InputSpace(const AttackGraph& graph);

  std::size_t bits() const noexcept { return fractional.size(); }
  std::uint64_t instantiations() const noexcept {
    return std::uint64_t{1} << bits();
  }
  std::uint64_t batches() const noexcept {
    return (instantiations() + kLanes - 1) / kLanes;
  }
  /// Lanes in use for the given batch.
  Word lane_mask(std::uint64_t batch) const noexcept;
  /// Input words for batch `batch`: lane l carries instantiation
  /// batch * 64 + l, whose bit r drives fractional input r.
  void fill(std::uint64_t batch, std::vector<Word>& inputs) const;
};

/// Per-lane probability weights of one enumeration batch.
class LaneWeights {
 public:
  LaneWeights(const AttackGraph& graph, const InputSpace& space);
  /// Weight of lanes [0,64) within any batch (inputs of rank < 6).
  double low(std::size_t lane) const noexcept { return low_[lane]; }
  /// Common factor of every lane in `batch` (inputs of rank >= 6).
  double high(std::uint64_t batch) const;

 private:
  const AttackGraph& graph_;
  const InputSpace& space_;
  std::vector<double> low_;
};

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

class LaneCircuit {
 public:
  explicit LaneCircuit(const AttackGraph& graph)
      : graph_(graph), prev_(graph.size()), cur_(graph.size()) {}

  /// Runs from the all-zero state to the fixed point. After every step k
  /// that changed some value, calls on_step(k, state(k-1), state(k)).
  /// Returns k*, the first k with state(k+1) == state(k).
  template <class OnStep>
  std::size_t run(std::span<const Word> inputs, OnStep&& on_step) {
    std::fill(prev_.begin(), prev_.end(), Word{0});
    std::size_t k = 0;
    while (true) {
      bool changed = false;
      for (std::size_t v = 0; v < graph_.size(); ++v) {
        Word w;
        if (graph_.kind_at(v) == NodeKind::Or) {
          w = 0;
          for (auto pa : graph_.parents_at(v)) w |= prev_[pa];
          w &= inputs[v];
        } else {
          w = inputs[v];
          for (auto pa : graph_.parents_at(v)) w &= prev_[pa];
        }
        cur_[v] = w;
        changed |= w != prev_[v];
      }
      if (!changed) return k;
      ++k;
      on_step(k, std::span<const Word>(prev_), std::span<const Word>(cur_));
      prev_.swap(cur_);
    }
  }

  std::size_t run(std::span<const Word> inputs) {
    return run(inputs, [](std::size_t, std::span<const Word>,
                          std::span<const Word>) {});
  }

  /// Fixed-point values after run().
  std::span<const Word> state() const noexcept { return prev_; }

 private:
  const AttackGraph& graph_;
  std::vector<Word> prev_;
  std::vector<Word> cur_;
};

}  // namespace bagprob::detail
