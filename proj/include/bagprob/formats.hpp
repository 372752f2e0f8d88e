#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bagprob/graph.hpp"
#include "bagprob/propagate.hpp"

namespace bagprob {

inline constexpr std::string_view kGraphFormat = "bagprob-graph/1";

/**
 * Canonical graph document:
 *
 *   {"version": "bagprob-graph/1",
 *    "nodes": [{"id": 0, "kind": "leaf", "label": "...", "p": 0.7}, ...],
 *    "edges": [[parent, child], ...]}
 *
 * Output lists nodes and edges in ascending order, one per line, with
 * probabilities in shortest round-trip form, so equal graphs serialize to
 * identical bytes. Reading enforces every graph invariant and reports the
 * offending element's JSON path (SchemaError), or ParseError for bad JSON.
 */
std::string graph_to_json(const AttackGraph& graph);
AttackGraph graph_from_json(std::string_view text);

AttackGraph read_json(const std::filesystem::path& path);
void write_json(const AttackGraph& graph, const std::filesystem::path& path);

/**
 * Plain (exploit/condition) graph document:
 *
 *   {"exploits":   [{"id": 3, "label": "...", "p": 0.8}, ...],
 *    "conditions": [{"id": 0, "label": "...", "p": 1.0}, ...],
 *    "require": [[condition, exploit], ...],
 *    "imply":   [[exploit, condition], ...]}
 */
PlainBag plain_from_json(std::string_view text);
PlainBag read_plain_json(const std::filesystem::path& path);

/**
 * Two-file MulVAL-style export. Vertex lines are `id,"label",KIND,p` with
 * KIND in {LEAF, AND, OR}; arc lines are `src,dst`. Blank lines are
 * skipped. Errors are ParseError naming the file and line.
 */
AttackGraph mulval_from_csv(std::string_view vertices, std::string_view arcs);
AttackGraph read_mulval_csv(const std::filesystem::path& vertices,
                            const std::filesystem::path& arcs);

/// Graphviz digraph: Or = diamond, And = ellipse, leaf = box. Labels are
/// "id: label", plus "P=x.xxxx" when probabilities are supplied.
std::string graph_to_dot(const AttackGraph& graph,
                         const ProbabilityMap* probs = nullptr);
void write_dot(const AttackGraph& graph, const ProbabilityMap* probs,
               const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace bagprob
