#include "bagprob/propagate.hpp"

#include <algorithm>
#include <thread>

namespace bagprob {

double conjunction(std::span<const double> probs) noexcept {
  double acc = 1.0;
  for (double p : probs) acc *= p;
  return acc;
}

double disjunction(std::span<const double> probs) noexcept {
  double miss = 1.0;
  for (double p : probs) miss *= 1.0 - p;
  return 1.0 - miss;
}

namespace {

// Reusable per-thread scratch; the visited set is an epoch-stamped array so
// a fresh set costs O(1).
class Workspace {
 public:
  explicit Workspace(std::size_t n) : stamp_(n, 0) {}

  double solve(const AttackGraph& g, std::size_t origin, SolveStats* stats) {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    stamp_[origin] = epoch_;
    if (stats) ++stats->expanded;
    if (g.kind_at(origin) == NodeKind::Leaf) return g.prob_at(origin);

    // acc holds the running product of contributions (And) or of their
    // complements (Or); finishing mirrors conjunction()/disjunction().
    frames_.clear();
    frames_.push_back({origin, 0, 1.0});
    double result = 0.0;
    while (true) {
      Frame& f = frames_.back();
      auto parents = g.parents_at(f.node);
      if (f.next < parents.size()) {
        const std::size_t pa = parents[f.next++];
        if (stats) ++stats->parent_checks;
        double contribution;
        if (pa == origin) {
          contribution = 0.0;
        } else if (stamp_[pa] == epoch_) {
          contribution =
              g.kind_at(pa) == NodeKind::Leaf ? g.prob_at(pa) : 0.0;
        } else {
          stamp_[pa] = epoch_;
          if (stats) ++stats->expanded;
          if (g.kind_at(pa) != NodeKind::Leaf) {
            frames_.push_back({pa, 0, 1.0});
            continue;
          }
          contribution = g.prob_at(pa);
        }
        absorb(g, f, contribution);
        continue;
      }
      result = finish(g, f);
      frames_.pop_back();
      if (frames_.empty()) return result;
      absorb(g, frames_.back(), result);
    }
  }

 private:
  struct Frame {
    std::size_t node;
    std::size_t next;
    double acc;
  };

  static void absorb(const AttackGraph& g, Frame& f, double c) {
    if (g.kind_at(f.node) == NodeKind::And) {
      f.acc *= c;
    } else {
      f.acc *= 1.0 - c;
    }
  }

  static double finish(const AttackGraph& g, const Frame& f) {
    const double combined =
        g.kind_at(f.node) == NodeKind::And ? f.acc : 1.0 - f.acc;
    return combined * g.prob_at(f.node);
  }

  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<Frame> frames_;
};

}  // namespace

double solve_node(const AttackGraph& graph, NodeId v, SolveStats* stats) {
  graph.require_valid();
  const std::size_t origin = graph.require_index(v);
  Workspace ws(graph.size());
  return ws.solve(graph, origin, stats);
}

std::vector<double> solve_all_indexed(const AttackGraph& graph,
                                      unsigned threads) {
  graph.require_valid();
  const std::size_t n = graph.size();
  std::vector<double> out(n, 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, n ? n : 1));
  if (threads == 1) {
    Workspace ws(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = ws.solve(graph, i, nullptr);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      Workspace ws(n);
      for (std::size_t i = t; i < n; i += threads) {
        out[i] = ws.solve(graph, i, nullptr);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

ProbabilityMap solve_all(const AttackGraph& graph, unsigned threads) {
  auto values = solve_all_indexed(graph, threads);
  ProbabilityMap out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.emplace_hint(out.end(), graph.id_at(i), values[i]);
  }
  return out;
}

std::vector<double> solve_acyclic_closed_form_indexed(
    const AttackGraph& graph) {
  graph.require_valid();
  auto order = topological_order(graph);
  if (!order) {
    throw BagError(ErrorCode::GraphCyclic,
                   "closed-form evaluation needs an acyclic graph");
  }
  std::vector<double> value(graph.size(), 0.0);
  std::vector<double> inputs;
  for (std::size_t v : *order) {
    const double p = graph.prob_at(v);
    if (graph.kind_at(v) == NodeKind::Leaf) {
      value[v] = p;
      continue;
    }
    inputs.clear();
    for (auto pa : graph.parents_at(v)) inputs.push_back(value[pa]);
    value[v] = (graph.kind_at(v) == NodeKind::And ? conjunction(inputs)
                                                  : disjunction(inputs)) *
               p;
  }
  return value;
}

ProbabilityMap solve_acyclic_closed_form(const AttackGraph& graph) {
  auto values = solve_acyclic_closed_form_indexed(graph);
  ProbabilityMap out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.emplace_hint(out.end(), graph.id_at(i), values[i]);
  }
  return out;
}

}  // namespace bagprob
