#include "bagprob/scoring.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace bagprob {

double probability_from_complexity(const ComplexityScore& score) noexcept {
  switch (score.value) {
    case Complexity::Low: return 0.71;
    case Complexity::Medium: return 0.61;
    case Complexity::High: return 0.35;
    case Complexity::Unknown: return 0.61;
  }
  return 0.61;
}

ComplexityScore parse_cvss_vector(std::string_view vector) {
  std::string text(vector);
  while (!text.empty() && (text.front() == ' ' || text.front() == '(')) {
    text.erase(text.begin());
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == ')')) {
    text.pop_back();
  }
  CvssVersion version = CvssVersion::V2;
  if (text.rfind("CVSS:3.", 0) == 0) {
    version = CvssVersion::V3;
    text.erase(0, text.find('/') == std::string::npos ? text.size()
                                                      : text.find('/') + 1);
  } else if (text.rfind("CVSS:", 0) == 0) {
    return {};
  }

  std::map<std::string, std::string> metrics;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, '/')) {
    auto colon = part.find(':');
    if (colon == std::string::npos || colon == 0) return {};
    metrics[part.substr(0, colon)] = part.substr(colon + 1);
  }
  // A bare "AC:x" is too weak to call a vector; require the attack vector.
  if (!metrics.count("AV") || !metrics.count("AC")) return {};
  const std::string& ac = metrics["AC"];
  if (ac == "L") return {Complexity::Low, version};
  if (ac == "H") return {Complexity::High, version};
  if (ac == "M" && version == CvssVersion::V2) return {Complexity::Medium, version};
  return {};
}

namespace {

const std::regex& cve_pattern() {
  static const std::regex pattern(R"(CVE-\d{4}-\d{4,})");
  return pattern;
}

}  // namespace

bool is_cve_id(std::string_view text) {
  return std::regex_match(text.begin(), text.end(), cve_pattern());
}

std::vector<std::string> find_cve_ids(std::string_view text) {
  std::vector<std::string> out;
  using It = std::string_view::const_iterator;
  for (std::regex_iterator<It> it(text.begin(), text.end(), cve_pattern()), end;
       it != end; ++it) {
    out.push_back(it->str());
  }
  return out;
}

FeedImport import_feed_text(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw BagError(ErrorCode::ParseError,
                   "feed is not valid JSON at line " + std::to_string(line) +
                       ", column " + std::to_string(column) + " (offset " +
                       std::to_string(e.byte) + ")");
  }
  if (!doc.is_array()) {
    throw BagError(ErrorCode::ParseError, "feed root must be a JSON array");
  }

  FeedImport result;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = "[" + std::to_string(i) + "]";
    if (!item.is_object()) {
      throw BagError(ErrorCode::ParseError, where + " must be an object");
    }
    for (const char* key : {"cve_id", "vector"}) {
      if (!item.contains(key) || !item[key].is_string()) {
        throw BagError(ErrorCode::ParseError,
                       where + "." + key + " must be a string");
      }
    }
    CveRecord record{item["cve_id"].get<std::string>(),
                     parse_cvss_vector(item["vector"].get<std::string>())};
    if (!is_cve_id(record.cve_id)) {
      throw BagError(ErrorCode::ParseError,
                     where + ".cve_id '" + record.cve_id +
                         "' is not a CVE identifier");
    }
    auto [it, fresh] = seen.emplace(record.cve_id, result.records.size());
    if (fresh) {
      result.records.push_back(std::move(record));
    } else {
      result.warnings.push_back("duplicate " + record.cve_id + " at " + where +
                                " replaces the earlier record");
      result.records[it->second] = std::move(record);
    }
  }
  return result;
}

FeedImport import_feed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BagError(ErrorCode::IoError, "cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return import_feed_text(buffer.str());
}

ScoredGraph apply_scores(const AttackGraph& graph,
                         const std::vector<CveRecord>& records) {
  std::map<std::string, const CveRecord*> by_id;
  for (const auto& r : records) by_id[r.cve_id] = &r;
  std::map<std::string, bool> used;

  std::vector<double> probs(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    probs[i] = graph.prob_at(i);
    if (graph.kind_at(i) != NodeKind::Leaf) continue;
    for (const auto& id : find_cve_ids(graph.label_at(i))) {
      auto it = by_id.find(id);
      if (it == by_id.end()) continue;
      probs[i] = probability_from_complexity(it->second->complexity);
      used[id] = true;
      break;
    }
  }
  ScoredGraph out{graph.with_probabilities(probs), {}};
  for (const auto& r : records) {
    if (!used.count(r.cve_id)) {
      out.warnings.push_back(r.cve_id + " does not match any leaf label");
    }
  }
  return out;
}

}  // namespace bagprob
