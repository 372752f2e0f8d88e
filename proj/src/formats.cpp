#include "bagprob/formats.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bagprob {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BagError(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BagError(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw BagError(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw BagError(ErrorCode::SchemaError, where + ": " + what);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw BagError(ErrorCode::ParseError,
                   std::string("invalid JSON at offset ") +
                       std::to_string(e.byte));
  }
}

NodeId read_id(const json& value, const std::string& where) {
  if (!value.is_number_integer()) schema(where, "expected a non-negative integer");
  const auto raw = value.get<std::int64_t>();
  if (raw < 0 || raw > static_cast<std::int64_t>(UINT32_MAX)) {
    schema(where, "node id out of range");
  }
  return static_cast<NodeId>(raw);
}

double read_prob(const json& value, const std::string& where) {
  if (!value.is_number()) schema(where, "expected a number");
  const double p = value.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) schema(where, "probability outside [0,1]");
  return p;
}

std::string read_label(const json& obj, const std::string& where) {
  if (!obj.contains("label")) return {};
  if (!obj["label"].is_string()) schema(where + ".label", "expected a string");
  return obj["label"].get<std::string>();
}

Edge read_edge(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2) {
    schema(where, "expected [parent, child]");
  }
  return {read_id(value[0], where + "[0]"), read_id(value[1], where + "[1]")};
}

const json& require_array(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    schema(key, "expected an array");
  }
  return doc[key];
}

}  // namespace

std::string graph_to_json(const AttackGraph& graph) {
  graph.require_valid();
  std::string out = "{\n  \"version\": ";
  out += json(std::string(kGraphFormat)).dump();
  out += ",\n  \"nodes\": [";
  for (std::size_t i = 0; i < graph.size(); ++i) {
    ordered_json node;
    node["id"] = graph.id_at(i);
    node["kind"] = std::string(to_string(graph.kind_at(i)));
    node["label"] = graph.label_at(i);
    node["p"] = graph.prob_at(i);
    out += i == 0 ? "\n    " : ",\n    ";
    out += node.dump();
  }
  out += graph.size() ? "\n  ],\n  \"edges\": [" : "],\n  \"edges\": [";
  bool first = true;
  for (const Edge& e : graph.edges()) {
    out += first ? "\n    [" : ",\n    [";
    out += std::to_string(e.parent) + ", " + std::to_string(e.child) + "]";
    first = false;
  }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

AttackGraph graph_from_json(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) schema("$", "expected an object");
  if (doc.contains("version") &&
      (!doc["version"].is_string() ||
       doc["version"].get<std::string>() != kGraphFormat)) {
    schema("version", "unsupported format version");
  }

  std::vector<Node> nodes;
  std::map<NodeId, NodeKind> kinds;
  const json& node_list = require_array(doc, "nodes");
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& item = node_list[i];
    if (!item.is_object()) schema(where, "expected an object");
    if (!item.contains("id")) schema(where + ".id", "missing");
    if (!item.contains("kind")) schema(where + ".kind", "missing");
    Node node;
    node.id = read_id(item["id"], where + ".id");
    if (!item["kind"].is_string()) schema(where + ".kind", "expected a string");
    auto kind = parse_node_kind(item["kind"].get<std::string>());
    if (!kind) {
      schema(where + ".kind",
             "unknown kind '" + item["kind"].get<std::string>() + "'");
    }
    node.kind = *kind;
    node.label = read_label(item, where);
    node.local_prob =
        item.contains("p") ? read_prob(item["p"], where + ".p") : 1.0;
    if (!kinds.emplace(node.id, node.kind).second) {
      schema(where + ".id", "duplicate node id " + std::to_string(node.id));
    }
    nodes.push_back(std::move(node));
  }

  std::vector<Edge> edges;
  std::set<Edge> seen;
  const json& edge_list = require_array(doc, "edges");
  for (std::size_t i = 0; i < edge_list.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const Edge e = read_edge(edge_list[i], where);
    if (!kinds.count(e.parent) || !kinds.count(e.child)) {
      schema(where, "dangling edge references a missing node");
    }
    if (e.parent == e.child) schema(where, "self edge");
    if (!seen.insert(e).second) schema(where, "duplicate edge");
    if (kinds[e.child] == NodeKind::Leaf) {
      schema(where, "leaf " + std::to_string(e.child) + " cannot have a parent");
    }
    edges.push_back(e);
  }
  return AttackGraph(std::move(nodes), std::move(edges));
}

AttackGraph read_json(const std::filesystem::path& path) {
  return graph_from_json(read_text_file(path));
}

void write_json(const AttackGraph& graph, const std::filesystem::path& path) {
  write_text_file(path, graph_to_json(graph));
}

PlainBag plain_from_json(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) schema("$", "expected an object");
  PlainBag plain;
  auto read_nodes = [&](const char* key, std::vector<NodeId>& into) {
    const json& list = require_array(doc, key);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
      const json& item = list[i];
      if (!item.is_object() || !item.contains("id")) {
        schema(where, "expected an object with an id");
      }
      const NodeId id = read_id(item["id"], where + ".id");
      into.push_back(id);
      plain.score[id] = item.contains("p") ? read_prob(item["p"], where + ".p") : 1.0;
      plain.labels[id] = read_label(item, where);
    }
  };
  read_nodes("exploits", plain.exploits);
  read_nodes("conditions", plain.conditions);
  auto read_edges = [&](const char* key, std::vector<Edge>& into) {
    const json& list = require_array(doc, key);
    for (std::size_t i = 0; i < list.size(); ++i) {
      into.push_back(read_edge(list[i], std::string(key) + "[" +
                                            std::to_string(i) + "]"));
    }
  };
  read_edges("require", plain.require_edges);
  read_edges("imply", plain.imply_edges);
  return plain;
}

PlainBag read_plain_json(const std::filesystem::path& path) {
  return plain_from_json(read_text_file(path));
}

namespace {

[[noreturn]] void csv_error(const char* file, std::size_t line,
                            const std::string& what) {
  throw BagError(ErrorCode::ParseError, std::string(file) + " line " +
                                            std::to_string(line) + ": " + what);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::istringstream in{std::string(text)};
  while (std::getline(in, current)) out.push_back(current);
  return out;
}

}  // namespace

AttackGraph mulval_from_csv(std::string_view vertices, std::string_view arcs) {
  std::vector<Node> nodes;
  const auto vertex_lines = lines_of(vertices);
  for (std::size_t ln = 0; ln < vertex_lines.size(); ++ln) {
    const std::string line = trim(vertex_lines[ln]);
    const std::size_t lineno = ln + 1;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) csv_error("vertices", lineno, "missing fields");
    std::uint32_t id = 0;
    if (!parse_number(trim(line.substr(0, comma)), id)) {
      csv_error("vertices", lineno, "bad id");
    }
    std::string rest = trim(line.substr(comma + 1));
    std::string label;
    if (!rest.empty() && rest.front() == '"') {
      std::size_t i = 1;
      bool closed = false;
      for (; i < rest.size(); ++i) {
        if (rest[i] == '"') {
          if (i + 1 < rest.size() && rest[i + 1] == '"') {
            label += '"';
            ++i;
            continue;
          }
          closed = true;
          break;
        }
        label += rest[i];
      }
      if (!closed) csv_error("vertices", lineno, "unterminated quoted label");
      rest = trim(rest.substr(i + 1));
      if (rest.empty() || rest.front() != ',') {
        csv_error("vertices", lineno, "expected ',' after label");
      }
      rest = rest.substr(1);
    } else {
      const auto next = rest.find(',');
      if (next == std::string::npos) csv_error("vertices", lineno, "missing fields");
      label = trim(rest.substr(0, next));
      rest = rest.substr(next + 1);
    }
    const auto kind_end = rest.find(',');
    if (kind_end == std::string::npos) {
      csv_error("vertices", lineno, "missing probability");
    }
    const std::string kind_text = trim(rest.substr(0, kind_end));
    const std::string prob_text = trim(rest.substr(kind_end + 1));
    if (prob_text.find(',') != std::string::npos) {
      csv_error("vertices", lineno,
                "too many fields (unquoted comma in label?)");
    }
    NodeKind kind;
    if (kind_text == "LEAF") {
      kind = NodeKind::Leaf;
    } else if (kind_text == "AND") {
      kind = NodeKind::And;
    } else if (kind_text == "OR") {
      kind = NodeKind::Or;
    } else {
      csv_error("vertices", lineno, "unknown kind '" + kind_text + "'");
    }
    double p = 0.0;
    if (!parse_number(prob_text, p) || !(p >= 0.0 && p <= 1.0)) {
      csv_error("vertices", lineno, "bad probability '" + prob_text + "'");
    }
    nodes.push_back({id, kind, std::move(label), p});
  }

  std::vector<Edge> edges;
  const auto arc_lines = lines_of(arcs);
  for (std::size_t ln = 0; ln < arc_lines.size(); ++ln) {
    const std::string line = trim(arc_lines[ln]);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::uint32_t src = 0, dst = 0;
    if (comma == std::string::npos ||
        !parse_number(trim(line.substr(0, comma)), src) ||
        !parse_number(trim(line.substr(comma + 1)), dst)) {
      csv_error("arcs", ln + 1, "expected 'src,dst'");
    }
    edges.push_back({src, dst});
  }

  AttackGraph graph(std::move(nodes), std::move(edges));
  if (!graph.valid()) {
    const Issue& first = graph.report().errors.front();
    throw BagError(ErrorCode::ParseError,
                   "invalid graph: " + first.code + ": " + first.message);
  }
  return graph;
}

AttackGraph read_mulval_csv(const std::filesystem::path& vertices,
                            const std::filesystem::path& arcs) {
  return mulval_from_csv(read_text_file(vertices), read_text_file(arcs));
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

std::string graph_to_dot(const AttackGraph& graph, const ProbabilityMap* probs) {
  graph.require_valid();
  std::string out = "digraph bag {\n";
  char buf[32];
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const NodeId id = graph.id_at(i);
    std::string label = std::to_string(id) + ": " + dot_escape(graph.label_at(i));
    if (probs) {
      auto it = probs->find(id);
      if (it == probs->end()) {
        throw BagError(ErrorCode::InvalidArgument,
                       "no probability for node " + std::to_string(id));
      }
      std::snprintf(buf, sizeof buf, "%.4f", it->second);
      label += "\\nP=";
      label += buf;
    }
    const char* shape = graph.kind_at(i) == NodeKind::Or    ? "diamond"
                        : graph.kind_at(i) == NodeKind::And ? "ellipse"
                                                            : "box";
    out += "  n" + std::to_string(id) + " [label=\"" + label +
           "\", shape=" + shape + "];\n";
  }
  for (const Edge& e : graph.edges()) {
    out += "  n" + std::to_string(e.parent) + " -> n" +
           std::to_string(e.child) + ";\n";
  }
  out += "}\n";
  return out;
}

void write_dot(const AttackGraph& graph, const ProbabilityMap* probs,
               const std::filesystem::path& path) {
  write_text_file(path, graph_to_dot(graph, probs));
}

}  // namespace bagprob
