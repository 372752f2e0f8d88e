#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "bagprob/formats.hpp"
#include "bagprob/scoring.hpp"
#include "test_support.hpp"

using namespace bagprob;
using namespace testing_support;

TEST(Complexity, TableValues) {
  EXPECT_EQ(probability_from_complexity({Complexity::Low, CvssVersion::V3}), 0.71);
  EXPECT_EQ(probability_from_complexity({Complexity::Medium, CvssVersion::V2}), 0.61);
  EXPECT_EQ(probability_from_complexity({Complexity::High, CvssVersion::V2}), 0.35);
  EXPECT_EQ(probability_from_complexity({}), 0.61);
}

TEST(Complexity, RangeIsThreeValues) {
  std::set<double> range;
  for (auto c : {Complexity::Low, Complexity::Medium, Complexity::High,
                 Complexity::Unknown}) {
    for (auto v : {CvssVersion::V2, CvssVersion::V3, CvssVersion::Unknown}) {
      range.insert(probability_from_complexity({c, v}));
    }
  }
  EXPECT_EQ(range, (std::set<double>{0.35, 0.61, 0.71}));
}

TEST(ParseCvss, Examples) {
  EXPECT_EQ(parse_cvss_vector("AV:N/AC:L/Au:N/C:P/I:P/A:P"),
            (ComplexityScore{Complexity::Low, CvssVersion::V2}));
  EXPECT_EQ(parse_cvss_vector("CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:H/A:H"),
            (ComplexityScore{Complexity::High, CvssVersion::V3}));
  EXPECT_EQ(parse_cvss_vector("garbage"), ComplexityScore{});
}

TEST(ParseCvss, EdgeCases) {
  EXPECT_EQ(parse_cvss_vector("(AV:N/AC:M/Au:N/C:C/I:C/A:C)"),
            (ComplexityScore{Complexity::Medium, CvssVersion::V2}));
  EXPECT_EQ(parse_cvss_vector("CVSS:3.0/AV:L/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H"),
            (ComplexityScore{Complexity::Low, CvssVersion::V3}));
  // Medium does not exist in v3.
  EXPECT_EQ(parse_cvss_vector("CVSS:3.1/AV:N/AC:M").value, Complexity::Unknown);
  EXPECT_EQ(parse_cvss_vector("CVSS:4.0/AV:N/AC:L").value, Complexity::Unknown);
  EXPECT_EQ(parse_cvss_vector("AC:L").value, Complexity::Unknown);
  EXPECT_EQ(parse_cvss_vector("").value, Complexity::Unknown);
  EXPECT_EQ(parse_cvss_vector("AV:N/AC:X").value, Complexity::Unknown);
}

TEST(CveIds, Matching) {
  EXPECT_TRUE(is_cve_id("CVE-2009-1918"));
  EXPECT_TRUE(is_cve_id("CVE-2021-123456"));
  EXPECT_FALSE(is_cve_id("CVE-09-1918"));
  EXPECT_FALSE(is_cve_id("cve-2009-1918"));
  EXPECT_EQ(find_cve_ids("vulExists(a,'CVE-2009-1918',IE) CVE-2006-3747"),
            (std::vector<std::string>{"CVE-2009-1918", "CVE-2006-3747"}));
}

TEST(Feed, TwoRecords) {
  const FeedImport f = import_feed_text(
      R"([{"cve_id": "CVE-2009-1918", "vector": "AV:N/AC:M/Au:N/C:C/I:C/A:C"},
          {"cve_id": "CVE-2020-0001", "vector": "CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:H/A:H"}])");
  ASSERT_EQ(f.records.size(), 2u);
  EXPECT_TRUE(f.warnings.empty());
  EXPECT_EQ(probability_from_complexity(f.records[1].complexity), 0.35);
}

TEST(Feed, DuplicateKeepsLast) {
  const FeedImport f = import_feed_text(
      R"([{"cve_id": "CVE-2009-1918", "vector": "AV:N/AC:M/Au:N/C:C/I:C/A:C"},
          {"cve_id": "CVE-2009-1918", "vector": "AV:N/AC:L/Au:N/C:C/I:C/A:C"}])");
  ASSERT_EQ(f.records.size(), 1u);
  EXPECT_EQ(f.warnings.size(), 1u);
  EXPECT_EQ(f.records[0].complexity.value, Complexity::Low);
}

TEST(Feed, Errors) {
  try {
    import_feed_text("[\n  {\"cve_id\": \"CVE-2009-1918\",\n  oops}\n]");
    FAIL();
  } catch (const BagError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_BAG_ERROR(import_feed_text("{}"), ErrorCode::ParseError);
  EXPECT_BAG_ERROR(import_feed_text(R"([{"cve_id": "X-1", "vector": "AC:L"}])"),
                   ErrorCode::ParseError);
  EXPECT_BAG_ERROR(import_feed_text(R"([{"cve_id": "CVE-2009-1918"}])"),
                   ErrorCode::ParseError);
  EXPECT_BAG_ERROR(import_feed("/nonexistent/feed.json"), ErrorCode::IoError);
}

TEST(ApplyScores, RunningExample) {
  const AttackGraph g = load("running-example.json");
  const FeedImport feed = import_feed(fixture("running-example.feed.json"));
  const ScoredGraph s = apply_scores(g, feed.records);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_EQ(s.graph.node(13).local_prob, 0.61);  // CVE-2009-1918, AC:M
  EXPECT_EQ(s.graph.node(18).local_prob, 0.35);  // CVE-2006-3747, AC:H
  EXPECT_EQ(s.graph.node(17).local_prob, 0.61);  // CVE-2009-2446, AC:M
  EXPECT_EQ(s.graph.edges(), g.edges());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(s.graph.id_at(i), g.id_at(i));
    EXPECT_EQ(s.graph.kind_at(i), g.kind_at(i));
    if (g.id_at(i) != 13 && g.id_at(i) != 17 && g.id_at(i) != 18) {
      EXPECT_EQ(s.graph.prob_at(i), g.prob_at(i));
    }
  }
}

TEST(ApplyScores, LowRecordGivesHighProbability) {
  const AttackGraph g = load("running-example.json");
  const ScoredGraph s =
      apply_scores(g, {{"CVE-2009-1918", {Complexity::Low, CvssVersion::V2}}});
  EXPECT_EQ(s.graph.node(13).local_prob, 0.71);
}

TEST(ApplyScores, UnmatchedRecordsWarn) {
  const AttackGraph g = load("fig5.json");
  const ScoredGraph s =
      apply_scores(g, {{"CVE-1999-0001", {Complexity::High, CvssVersion::V2}}});
  EXPECT_EQ(s.graph, g);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("CVE-1999-0001"), std::string::npos);
}

TEST(ApplyScores, InteriorLabelsAreIgnored) {
  AttackGraph g({leaf(0, 1.0), and_node(1, 1.0, "exploit CVE-2009-1918")}, {{0, 1}});
  const ScoredGraph s =
      apply_scores(g, {{"CVE-2009-1918", {Complexity::High, CvssVersion::V2}}});
  EXPECT_EQ(s.graph.node(1).local_prob, 1.0);
  EXPECT_EQ(s.warnings.size(), 1u);
}
