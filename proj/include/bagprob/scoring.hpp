#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bagprob/graph.hpp"

namespace bagprob {

enum class Complexity { Low, Medium, High, Unknown };
enum class CvssVersion { V2, V3, Unknown };

struct ComplexityScore {
  Complexity value = Complexity::Unknown;
  CvssVersion version = CvssVersion::Unknown;

  friend bool operator==(const ComplexityScore&, const ComplexityScore&) = default;
};

struct CveRecord {
  std::string cve_id;
  ComplexityScore complexity;
};

/// Low 0.71, Medium 0.61, Unknown 0.61, High 0.35.
double probability_from_complexity(const ComplexityScore& score) noexcept;

/// Reads the AC (access / attack complexity) metric from a CVSS v2 vector
/// ("AV:N/AC:M/...") or v3 vector ("CVSS:3.1/AV:N/AC:H/..."). Anything else
/// maps to {Unknown, Unknown}.
ComplexityScore parse_cvss_vector(std::string_view vector);

/// True when `text` is exactly one CVE identifier (CVE-YYYY-NNNN...).
bool is_cve_id(std::string_view text);
/// All CVE identifiers appearing in `text`, in order.
std::vector<std::string> find_cve_ids(std::string_view text);

struct FeedImport {
  std::vector<CveRecord> records;  // first-seen order, last value wins
  std::vector<std::string> warnings;
};

/// Offline feed: JSON array of {"cve_id": ..., "vector": ...}.
/// Throws IoError, or ParseError with line/column or element path.
FeedImport import_feed(const std::filesystem::path& path);
FeedImport import_feed_text(std::string_view text);

struct ScoredGraph {
  AttackGraph graph;
  std::vector<std::string> warnings;
};

/// Sets the local probability of every leaf whose label mentions a CVE in
/// `records`; structure is untouched. Records that match no leaf are
/// reported as warnings.
ScoredGraph apply_scores(const AttackGraph& graph,
                         const std::vector<CveRecord>& records);

}  // namespace bagprob
