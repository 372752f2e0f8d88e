#include "bagprob/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "bagprob/propagate.hpp"

namespace bagprob {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, bound).
  std::size_t below(std::size_t bound) {
    return static_cast<std::size_t>(engine_() % bound);
  }
  /// Uniform in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) {
    return lo + below(hi - lo + 1);
  }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
  /// `count` distinct elements of `pool`.
  template <class T>
  std::vector<T> sample(const std::vector<T>& pool, std::size_t count) {
    std::vector<T> copy = pool;
    count = std::min(count, copy.size());
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(copy[i], copy[i + below(copy.size() - i)]);
    }
    copy.resize(count);
    return copy;
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_params(const GenParams& p) {
  auto bad = [](const std::string& msg) {
    throw BagError(ErrorCode::InvalidArgument, msg);
  };
  if (p.n < 3) bad("n must be at least 3");
  if (!(p.cyclicity >= 0.0 && p.cyclicity <= 100.0)) {
    bad("cyclicity must be within [0,100]");
  }
  if (p.ratio[0] + p.ratio[1] + p.ratio[2] != 100) {
    bad("leaf:and:or ratio must sum to 100");
  }
  if (p.max_parents < 2) bad("max_parents must be at least 2");
}

}  // namespace

NodeCounts planned_counts(const GenParams& params) {
  check_params(params);
  NodeCounts c;
  c.leaves = static_cast<std::size_t>(
      std::llround(static_cast<double>(params.n) * params.ratio[0] / 100.0));
  c.ands = static_cast<std::size_t>(
      std::llround(static_cast<double>(params.n) * params.ratio[1] / 100.0));
  if (c.leaves + c.ands > params.n) c.ands = params.n - c.leaves;
  c.ors = params.n - c.leaves - c.ands;
  return c;
}

AttackGraph generate(const GenParams& params) {
  const NodeCounts counts = planned_counts(params);
  const std::size_t wanted_on_cycle = static_cast<std::size_t>(std::ceil(
      params.cyclicity * static_cast<double>(counts.ors) / 100.0 - 1e-9));
  if (wanted_on_cycle > 0 && counts.ors < 2) {
    throw BagError(ErrorCode::Infeasible,
                   "cycles need at least two Or nodes, have " +
                       std::to_string(counts.ors));
  }
  if (counts.ands > 0 && counts.leaves == 0) {
    throw BagError(ErrorCode::Infeasible, "And nodes need at least one leaf");
  }
  const std::size_t bridges = wanted_on_cycle;
  if (counts.ors > 0 && counts.ands < bridges + 1) {
    throw BagError(ErrorCode::Infeasible,
                   "not enough And nodes to close the requested cycles");
  }
  const std::size_t regular_ands = counts.ands - bridges;

  Rng rng(params.seed);
  const std::size_t n = params.n;
  std::vector<NodeKind> kind(n);
  std::vector<std::vector<std::uint32_t>> parents(n);
  auto link = [&](std::size_t from, std::size_t to) {
    auto& list = parents[to];
    if (std::find(list.begin(), list.end(), from) == list.end()) {
      list.push_back(static_cast<std::uint32_t>(from));
    }
  };

  // Ids: leaves, then the interior sequence in topological order, then the
  // bridge reserve.
  std::vector<std::size_t> leaves(counts.leaves);
  for (std::size_t i = 0; i < counts.leaves; ++i) {
    leaves[i] = i;
    kind[i] = NodeKind::Leaf;
  }
  std::vector<NodeKind> sequence(regular_ands, NodeKind::And);
  sequence.resize(regular_ands + counts.ors, NodeKind::Or);
  rng.shuffle(sequence);
  if (!sequence.empty() && sequence.front() != NodeKind::And) {
    auto first_and = std::find(sequence.begin(), sequence.end(), NodeKind::And);
    if (first_and != sequence.end()) std::iter_swap(sequence.begin(), first_and);
  }

  std::vector<std::size_t> ands_so_far, ors_so_far, all_ands;
  std::vector<std::size_t> or_order;  // Or nodes in topological order
  std::size_t next_id = counts.leaves;
  for (NodeKind k : sequence) {
    const std::size_t v = next_id++;
    kind[v] = k;
    if (k == NodeKind::Or) {
      if (!ands_so_far.empty()) {
        const std::size_t fan = rng.between(
            1, std::min({params.max_parents, ands_so_far.size(),
                         std::size_t{3}}));
        for (auto a : rng.sample(ands_so_far, fan)) link(a, v);
      }
      ors_so_far.push_back(v);
      or_order.push_back(v);
    } else {
      if (!ors_so_far.empty()) {
        const std::size_t fan = rng.between(
            1, std::min({params.max_parents - 1, ors_so_far.size(),
                         std::size_t{2}}));
        for (auto o : rng.sample(ors_so_far, fan)) link(o, v);
      }
      ands_so_far.push_back(v);
      all_ands.push_back(v);
    }
  }
  std::vector<std::size_t> reserve;
  for (std::size_t b = 0; b < bridges; ++b) {
    const std::size_t v = next_id++;
    kind[v] = NodeKind::And;
    reserve.push_back(v);
    all_ands.push_back(v);
  }

  // Every And gets a leaf; surplus leaves go to random Ands with room.
  if (!all_ands.empty()) {
    std::vector<std::size_t> pool = leaves;
    rng.shuffle(pool);
    for (std::size_t j = 0; j < all_ands.size(); ++j) {
      link(pool[j % pool.size()], all_ands[j]);
    }
    for (std::size_t j = all_ands.size(); j < pool.size(); ++j) {
      std::size_t target = all_ands[rng.below(all_ands.size())];
      for (int attempt = 0;
           attempt < 8 && parents[target].size() >= params.max_parents;
           ++attempt) {
        target = all_ands[rng.below(all_ands.size())];
      }
      link(pool[j], target);
    }
  }

  std::vector<double> prob(n, 1.0);
  for (auto leaf : leaves) prob[leaf] = kLeafPalette[rng.below(kLeafPalette.size())];

  auto build = [&] {
    std::vector<Node> nodes;
    nodes.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
      const char tag = kind[v] == NodeKind::Leaf  ? 'L'
                       : kind[v] == NodeKind::And ? 'A'
                                                  : 'O';
      nodes.push_back({static_cast<NodeId>(v), kind[v],
                       std::string(1, tag) + std::to_string(v), prob[v]});
    }
    std::vector<Edge> edges;
    for (std::size_t v = 0; v < n; ++v) {
      for (auto pa : parents[v]) {
        edges.push_back({static_cast<NodeId>(pa), static_cast<NodeId>(v)});
      }
    }
    return AttackGraph(std::move(nodes), std::move(edges));
  };

  // Close cycles from the deepest Or upward, each time bridging to an Or
  // grandparent (or back to itself when there is none).
  std::size_t used = 0;
  if (wanted_on_cycle > 0) {
    AttackGraph current = build();
    auto on_cycle = on_cycle_mask(current);
    auto count_on = [&] {
      std::size_t c = 0;
      for (auto o : or_order) c += on_cycle[o] ? 1 : 0;
      return c;
    };
    for (auto it = or_order.rbegin();
         it != or_order.rend() && count_on() < wanted_on_cycle; ++it) {
      const std::size_t d = *it;
      if (on_cycle[d]) continue;
      std::vector<std::size_t> grand;
      for (auto a : parents[d]) {
        for (auto g : parents[a]) {
          if (kind[g] == NodeKind::Or &&
              std::find(grand.begin(), grand.end(), g) == grand.end()) {
            grand.push_back(g);
          }
        }
      }
      std::sort(grand.begin(), grand.end());
      const std::size_t head = grand.empty() ? d : grand[rng.below(grand.size())];
      const std::size_t bridge = reserve[used++];
      link(d, bridge);
      link(bridge, head);
      current = build();
      on_cycle = on_cycle_mask(current);
    }
  }
  // Leftover reserve: plain sink Ands hanging off a random Or.
  for (std::size_t b = used; b < reserve.size(); ++b) {
    if (!or_order.empty()) link(or_order[rng.below(or_order.size())], reserve[b]);
  }
  for (auto& list : parents) std::sort(list.begin(), list.end());
  return build();
}

double achieved_cyclicity(const AttackGraph& graph) {
  const auto mask = on_cycle_mask(graph);
  std::size_t ors = 0, on = 0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.kind_at(i) != NodeKind::Or) continue;
    ++ors;
    if (mask[i]) ++on;
  }
  return ors == 0 ? 0.0 : 100.0 * static_cast<double>(on) / static_cast<double>(ors);
}

std::size_t nodes_in_cycles(const AttackGraph& graph) {
  const auto mask = on_cycle_mask(graph);
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::uint64_t bench_seed(std::uint64_t seed, std::size_t n, double cyclicity,
                         std::size_t replicate) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(n));
  h = splitmix(h ^ static_cast<std::uint64_t>(std::llround(cyclicity * 1000.0)));
  return splitmix(h ^ static_cast<std::uint64_t>(replicate));
}

std::vector<BenchRow> bench(const std::vector<std::size_t>& sizes,
                            const std::vector<double>& cyclicities,
                            std::size_t replicates, std::uint64_t seed,
                            const BenchOptions& options) {
  if (replicates == 0) {
    throw BagError(ErrorCode::InvalidArgument, "replicates must be at least 1");
  }
  std::vector<BenchRow> rows;
  for (auto n : sizes) {
    for (auto c : cyclicities) {
      for (std::size_t r = 0; r < replicates; ++r) {
        GenParams params;
        params.n = n;
        params.cyclicity = c;
        params.seed = bench_seed(seed, n, c, r);
        const AttackGraph graph = generate(params);
        const auto start = std::chrono::steady_clock::now();
        auto values = solve_all_indexed(graph, options.threads);
        const auto stop = std::chrono::steady_clock::now();
        volatile double sink = values.empty() ? 0.0 : values.back();
        (void)sink;
        rows.push_back({n, c, r,
                        std::chrono::duration<double>(stop - start).count(),
                        nodes_in_cycles(graph)});
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n,cyclicity,replicate,wall_time_seconds,nodes_in_cycles\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.9g", row.cyclicity);
    out << row.n << ',' << buf << ',' << row.replicate << ',';
    std::snprintf(buf, sizeof buf, "%.6f", row.wall_time_seconds);
    out << buf << ',' << row.nodes_in_cycles << '\n';
  }
}

}  // namespace bagprob
