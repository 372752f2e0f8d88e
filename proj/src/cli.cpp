#include "bagprob/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bagprob/bayes.hpp"
#include "bagprob/circuit.hpp"
#include "bagprob/cycle_analysis.hpp"
#include "bagprob/formats.hpp"
#include "bagprob/generator.hpp"
#include "bagprob/propagate.hpp"
#include "bagprob/scoring.hpp"

namespace bagprob::cli {

namespace {

enum class Format { Tsv, Json };

struct Common {
  std::string format = "tsv";
  int precision = 6;
  std::string out_path;

  Format fmt() const { return format == "json" ? Format::Json : Format::Tsv; }
};

void add_output_options(CLI::App* cmd, Common& common) {
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"tsv", "json"}));
  cmd->add_option("--precision", common.precision, "Decimals for probabilities")
      ->check(CLI::Range(0, 17));
}

std::string fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

std::string signed_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.*f", precision, value);
  return buf;
}

std::string quoted(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

/// Accepts a numeric id present in the graph, otherwise a unique exact label.
NodeId resolve_node(const AttackGraph& graph, const std::string& text) {
  NodeId id = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, id);
  if (ec == std::errc() && ptr == end && graph.contains(id)) return id;
  std::optional<NodeId> found;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.label_at(i) != text) continue;
    if (found) {
      throw BagError(ErrorCode::UnknownNode, "label '" + text + "' is ambiguous");
    }
    found = graph.id_at(i);
  }
  if (!found) throw BagError(ErrorCode::UnknownNode, "no node '" + text + "'");
  return *found;
}

AttackGraph load_graph(const std::string& path) {
  AttackGraph graph = read_json(path);
  graph.require_valid();
  return graph;
}

/// Writes `text` to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    T value{};
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      throw CLI::ValidationError(what, "bad list element '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

std::array<unsigned, 3> parse_ratio(const std::string& text) {
  std::array<unsigned, 3> ratio{};
  std::stringstream in(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(in, item, ':')) {
    unsigned value = 0;
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, value);
    if (i >= 3 || ec != std::errc() || ptr != end) {
      throw CLI::ValidationError("--ratio", "expected LEAF:AND:OR");
    }
    ratio[i++] = value;
  }
  if (i != 3) throw CLI::ValidationError("--ratio", "expected LEAF:AND:OR");
  if (ratio[0] + ratio[1] + ratio[2] != 100) {
    throw CLI::ValidationError("--ratio", "percentages must sum to 100");
  }
  return ratio;
}

std::string probability_table(const std::vector<std::pair<NodeId, double>>& rows,
                              const Common& common) {
  std::string text;
  if (common.fmt() == Format::Json) {
    text = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      text += i ? ",\n " : "\n ";
      text += "{\"id\": " + std::to_string(rows[i].first) +
              ", \"p\": " + fixed(rows[i].second, common.precision) + "}";
    }
    text += rows.empty() ? "]\n" : "\n]\n";
  } else {
    for (const auto& [id, p] : rows) {
      text += std::to_string(id) + "\t" + fixed(p, common.precision) + "\n";
    }
  }
  return text;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kUsage;
    case ErrorCode::TooLarge:
    case ErrorCode::WidthLimit:
    case ErrorCode::CycleLimitExceeded:
      return kResource;
    default:
      return kData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Access probabilities on cyclic Bayesian attack graphs",
               "bagprob"};
  app.require_subcommand(1);
  std::function<void()> action;

  // solve
  Common solve_opts;
  std::string solve_in, solve_target;
  unsigned solve_threads = 1;
  auto* solve = app.add_subcommand("solve", "Cycle-tolerant propagation");
  solve->add_option("--in", solve_in, "Graph JSON")->required();
  solve->add_option("--node", solve_target, "Node id or label");
  solve->add_option("--out", solve_opts.out_path, "Output file");
  solve->add_option("--threads", solve_threads, "Worker threads")
      ->check(CLI::Range(1u, 256u));
  add_output_options(solve, solve_opts);
  solve->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(solve_in);
      std::vector<std::pair<NodeId, double>> rows;
      if (!solve_target.empty()) {
        const NodeId v = resolve_node(graph, solve_target);
        rows.emplace_back(v, solve_node(graph, v));
      } else {
        const auto values = solve_all_indexed(graph, solve_threads);
        for (std::size_t i = 0; i < graph.size(); ++i) {
          rows.emplace_back(graph.id_at(i), values[i]);
        }
      }
      emit(solve_opts.out_path, probability_table(rows, solve_opts), out);
    };
  });

  // ve
  Common ve_opts;
  std::string ve_in, ve_node;
  auto* ve = app.add_subcommand("ve", "Exact marginal by variable elimination");
  ve->add_option("--in", ve_in, "Graph JSON (acyclic)")->required();
  ve->add_option("--node", ve_node, "Node id or label")->required();
  add_output_options(ve, ve_opts);
  ve->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(ve_in);
      const NodeId v = resolve_node(graph, ve_node);
      const double p = eliminate(to_bayes_net(graph), v);
      out << probability_table({{v, p}}, ve_opts);
    };
  });

  // circuit
  Common circuit_opts;
  std::string circuit_in, circuit_node;
  std::uint64_t mc_samples = 0, mc_seed = 0;
  auto* circuit = app.add_subcommand("circuit", "Circuit reachability");
  circuit->add_option("--in", circuit_in, "Graph JSON")->required();
  circuit->add_option("--node", circuit_node, "Node id or label")->required();
  auto* mc_opt = circuit->add_option("--mc", mc_samples, "Monte Carlo samples")
                     ->check(CLI::PositiveNumber);
  circuit->add_option("--seed", mc_seed, "Monte Carlo seed")->needs(mc_opt);
  add_output_options(circuit, circuit_opts);
  circuit->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(circuit_in);
      const NodeId v = resolve_node(graph, circuit_node);
      const ReachEstimate r = mc_samples > 0
                                  ? reachability_mc(graph, v, mc_samples, mc_seed)
                                  : reachability_exact(graph, v);
      const int prec = circuit_opts.precision;
      if (circuit_opts.fmt() == Format::Json) {
        out << "{\"id\": " << v << ", \"p\": " << fixed(r.probability, prec)
            << ", \"method\": " << quoted(to_string(r.method))
            << ", \"samples\": " << r.samples
            << ", \"std_error\": " << fixed(r.std_error, prec) << "}\n";
      } else {
        out << v << '\t' << fixed(r.probability, prec) << '\t'
            << to_string(r.method) << '\t' << r.samples << '\t'
            << fixed(r.std_error, prec) << '\n';
      }
    };
  });

  // compare
  Common compare_opts;
  std::string compare_in, compare_node;
  auto* compare = app.add_subcommand("compare", "All engines side by side");
  compare->add_option("--in", compare_in, "Graph JSON")->required();
  compare->add_option("--node", compare_node, "Node id or label")->required();
  add_output_options(compare, compare_opts);
  compare->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(compare_in);
      const NodeId v = resolve_node(graph, compare_node);
      const double algorithm = solve_node(graph, v);
      const double reach = reachability_exact(graph, v).probability;
      std::optional<double> exact_ve;
      if (is_acyclic(graph)) exact_ve = eliminate(to_bayes_net(graph), v);
      const int prec = compare_opts.precision;
      // Deltas are taken against the circuit value, which is defined on
      // cyclic graphs too.
      struct Row {
        const char* engine;
        std::optional<double> value;
      };
      const Row rows[] = {{"algorithm", algorithm}, {"ve", exact_ve},
                          {"circuit", reach}};
      if (compare_opts.fmt() == Format::Json) {
        out << "{\"id\": " << v;
        for (const Row& row : rows) {
          out << ", " << quoted(row.engine) << ": "
              << (row.value ? fixed(*row.value, prec) : "null");
        }
        out << ", \"delta_algorithm\": " << fixed(algorithm - reach, prec)
            << ", \"delta_ve\": "
            << (exact_ve ? fixed(*exact_ve - reach, prec) : "null") << "}\n";
      } else {
        out << "engine\tp\tdelta\n";
        for (const Row& row : rows) {
          out << row.engine << '\t'
              << (row.value ? fixed(*row.value, prec) : "NA") << '\t'
              << (row.value ? signed_fixed(*row.value - reach, prec) : "NA")
              << '\n';
        }
      }
    };
  });

  // cycles
  Common cycles_opts;
  std::string cycles_in, cycles_target;
  std::size_t cycles_max = kDefaultMaxCycles;
  auto* cycles = app.add_subcommand("cycles", "Find and classify cycles");
  cycles->add_option("--in", cycles_in, "Graph JSON")->required();
  cycles->add_option("--target", cycles_target, "Target node id or label");
  cycles->add_option("--max", cycles_max, "Cycle enumeration cap")
      ->check(CLI::PositiveNumber);
  add_output_options(cycles, cycles_opts);
  cycles->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(cycles_in);
      std::optional<NodeId> target;
      if (!cycles_target.empty()) target = resolve_node(graph, cycles_target);
      const auto found = find_cycles(graph, cycles_max);
      bool json = cycles_opts.fmt() == Format::Json;
      if (json) out << "[";
      std::size_t unresolved = 0;
      for (std::size_t c = 0; c < found.size(); ++c) {
        std::string type;
        std::optional<CycleWitness> witness;
        try {
          const CycleReport report = classify_cycle(graph, found[c], target);
          type = std::string(to_string(report.type));
          witness = report.witness;
        } catch (const BagError& e) {
          if (e.code() != ErrorCode::TargetRequired) throw;
          type = "needs-target";
          ++unresolved;
        }
        const Edge closing = closing_edge(graph, found[c]);
        std::string path, path_json;
        for (std::size_t i = 0; i < found[c].nodes.size(); ++i) {
          path += (i ? "," : "") + std::to_string(found[c].nodes[i]);
          path_json += (i ? ", " : "") + std::to_string(found[c].nodes[i]);
        }
        if (json) {
          out << (c ? ",\n " : "\n ") << "{\"cycle\": [" << path_json
              << "], \"type\": " << quoted(type) << ", \"target\": "
              << (target ? std::to_string(*target) : "null")
              << ", \"closing_edge\": [" << closing.parent << ", "
              << closing.child << "], \"witness\": ";
          if (witness) {
            out << "{\"node\": " << witness->node << ", \"k\": " << witness->k
                << "}";
          } else {
            out << "null";
          }
          out << "}";
        } else {
          out << c << '\t' << type << '\t' << path << '\t' << closing.parent
              << "->" << closing.child << '\t';
          if (witness) {
            out << witness->node << '@' << witness->k;
          } else {
            out << '-';
          }
          out << '\n';
        }
      }
      if (json) out << (found.empty() ? "]\n" : "\n]\n");
      if (unresolved > 0) {
        err << "note: " << unresolved
            << " cycle(s) need --target to decide between type2 and type3\n";
      }
    };
  });

  // generate
  std::size_t gen_n = 1000;
  double gen_cyclicity = 0.0;
  std::string gen_ratio = "50:35:15", gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_max_parents = 4;
  auto* gen = app.add_subcommand("generate", "Synthesize a random graph");
  gen->add_option("--n", gen_n, "Node count")->required()->check(CLI::Range(
      std::size_t{3}, std::size_t{10'000'000}));
  gen->add_option("--cyclicity", gen_cyclicity, "Percent of Or nodes on cycles")
      ->required()
      ->check(CLI::Range(0.0, 100.0));
  gen->add_option("--ratio", gen_ratio, "LEAF:AND:OR percentages");
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--max-parents", gen_max_parents, "Parent cap per node")
      ->check(CLI::Range(std::size_t{2}, std::size_t{64}));
  gen->add_option("--out", gen_out, "Output graph JSON");
  gen->callback([&] {
    GenParams params;
    params.n = gen_n;
    params.cyclicity = gen_cyclicity;
    params.ratio = parse_ratio(gen_ratio);
    params.seed = gen_seed;
    params.max_parents = gen_max_parents;
    action = [&, params] {
      emit(gen_out, graph_to_json(generate(params)), out);
    };
  });

  // bench
  std::string bench_sizes, bench_cycs, bench_out;
  std::size_t bench_reps = 1;
  std::uint64_t bench_seed_value = 0;
  unsigned bench_threads = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Scaling benchmark");
  bench_cmd->add_option("--sizes", bench_sizes, "Comma-separated node counts")
      ->required();
  bench_cmd->add_option("--cyclicities", bench_cycs, "Comma-separated percents")
      ->required();
  bench_cmd->add_option("--reps", bench_reps, "Replicates per cell")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed_value, "Random seed");
  bench_cmd->add_option("--threads", bench_threads, "Solver threads")
      ->check(CLI::Range(1u, 256u));
  bench_cmd->add_option("--out", bench_out, "Output CSV");
  bench_cmd->callback([&] {
    auto sizes = parse_list<std::size_t>(bench_sizes, "--sizes");
    auto cycs = parse_list<double>(bench_cycs, "--cyclicities");
    for (double c : cycs) {
      if (!(c >= 0.0 && c <= 100.0)) {
        throw CLI::ValidationError("--cyclicities", "values must be in [0,100]");
      }
    }
    action = [&, sizes, cycs] {
      BenchOptions options;
      options.threads = bench_threads;
      const auto rows = bench(sizes, cycs, bench_reps, bench_seed_value, options);
      std::ostringstream csv;
      write_bench_csv(csv, rows);
      emit(bench_out, csv.str(), out);
    };
  });

  // score
  Common score_opts;
  std::string score_in, score_feed;
  auto* score = app.add_subcommand("score", "Apply CVSS-derived leaf probabilities");
  score->add_option("--in", score_in, "Graph JSON")->required();
  score->add_option("--feed", score_feed, "Offline CVE feed JSON")->required();
  score->add_option("--out", score_opts.out_path, "Output graph JSON")->required();
  add_output_options(score, score_opts);
  score->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(score_in);
      const FeedImport feed = import_feed(score_feed);
      for (const auto& w : feed.warnings) err << "warning: " << w << '\n';
      const ScoredGraph scored = apply_scores(graph, feed.records);
      for (const auto& w : scored.warnings) err << "warning: " << w << '\n';
      write_json(scored.graph, score_opts.out_path);
      std::vector<std::pair<NodeId, double>> changed;
      for (std::size_t i = 0; i < graph.size(); ++i) {
        if (scored.graph.prob_at(i) != graph.prob_at(i)) {
          changed.emplace_back(graph.id_at(i), scored.graph.prob_at(i));
        }
      }
      out << probability_table(changed, score_opts);
    };
  });

  // convert
  std::string conv_plain, conv_vertices, conv_arcs, conv_out;
  auto* convert = app.add_subcommand("convert", "Convert to the graph format");
  auto* plain_opt =
      convert->add_option("--plain", conv_plain, "Plain exploit/condition JSON");
  auto* vert_opt =
      convert->add_option("--vertices", conv_vertices, "MulVAL-style vertex CSV");
  auto* arcs_opt = convert->add_option("--arcs", conv_arcs, "MulVAL-style arc CSV");
  vert_opt->needs(arcs_opt);
  arcs_opt->needs(vert_opt);
  plain_opt->excludes(vert_opt);
  convert->add_option("--out", conv_out, "Output graph JSON");
  convert->callback([&] {
    if (conv_plain.empty() && conv_vertices.empty()) {
      throw CLI::RequiredError("--plain or --vertices/--arcs");
    }
    action = [&] {
      const AttackGraph graph =
          conv_plain.empty() ? read_mulval_csv(conv_vertices, conv_arcs)
                             : convert_plain(read_plain_json(conv_plain));
      emit(conv_out, graph_to_json(graph), out);
    };
  });

  // dot
  std::string dot_in, dot_out;
  bool dot_probs = false;
  auto* dot = app.add_subcommand("dot", "Graphviz export");
  dot->add_option("--in", dot_in, "Graph JSON")->required();
  dot->add_flag("--probs", dot_probs, "Annotate with propagated probabilities");
  dot->add_option("--out", dot_out, "Output DOT file");
  dot->callback([&] {
    action = [&] {
      const AttackGraph graph = load_graph(dot_in);
      std::optional<ProbabilityMap> probs;
      if (dot_probs) probs = solve_all(graph);
      emit(dot_out, graph_to_dot(graph, probs ? &*probs : nullptr), out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (action) action();
  } catch (const BagError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kResource;
  }
  return kSuccess;
}

}  // namespace bagprob::cli
