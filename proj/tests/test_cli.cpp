#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "bagprob/cli.hpp"
#include "bagprob/formats.hpp"
#include "test_support.hpp"

using namespace bagprob;
using namespace testing_support;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("bagprob_cli_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

}  // namespace

TEST(Cli, SolveSingleNode) {
  const Result r = run({"solve", "--in", fixture("fig5.json"), "--node", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "2\t0.336000\n");
  EXPECT_TRUE(r.err.empty());
}

TEST(Cli, SolveAllJsonWithPrecision) {
  const Result r = run({"solve", "--in", fixture("fig5.json"), "--format", "json",
                        "--precision", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "[\n {\"id\": 0, \"p\": 0.700},\n {\"id\": 1, \"p\": 0.800},\n"
            " {\"id\": 2, \"p\": 0.336}\n]\n");
}

TEST(Cli, SolveThreadsDoNotChangeOutput) {
  const std::string g = fixture("running-example.json");
  EXPECT_EQ(run({"solve", "--in", g}).out,
            run({"solve", "--in", g, "--threads", "4"}).out);
}

TEST(Cli, SolveByLabel) {
  const Result r = run({"solve", "--in", fixture("diamond.json"), "--node", "O"});
  EXPECT_EQ(r.out, "3\t0.750000\n");
}

TEST(Cli, Compare) {
  const Result r = run({"compare", "--in", fixture("diamond.json"), "--node", "O"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "engine\tp\tdelta\n"
            "algorithm\t0.750000\t+0.250000\n"
            "ve\t0.500000\t+0.000000\n"
            "circuit\t0.500000\t+0.000000\n");
}

TEST(Cli, CompareOnCyclicGraphHasNoVe) {
  const Result r = run({"compare", "--in", fixture("type3.json"), "--node", "3",
                        "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"ve\": null"), std::string::npos) << r.out;
}

TEST(Cli, VeAndCircuit) {
  EXPECT_EQ(run({"ve", "--in", fixture("fig5.json"), "--node", "2"}).out,
            "2\t0.336000\n");
  EXPECT_EQ(run({"circuit", "--in", fixture("fig5.json"), "--node", "2"}).out,
            "2\t0.336000\texact\t8\t0.000000\n");
  const Result mc = run({"circuit", "--in", fixture("diamond.json"), "--node", "3",
                         "--mc", "1000", "--seed", "4"});
  EXPECT_EQ(mc.code, 0);
  EXPECT_NE(mc.out.find("monte-carlo\t1000"), std::string::npos) << mc.out;
  EXPECT_EQ(mc.out, run({"circuit", "--in", fixture("diamond.json"), "--node", "3",
                         "--mc", "1000", "--seed", "4"})
                        .out);
}

TEST(Cli, VeOnCyclicGraphIsDataError) {
  const Result r = run({"ve", "--in", fixture("two-cycle.json"), "--node", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("GRAPH_CYCLIC"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, Cycles) {
  const Result r = run({"cycles", "--in", fixture("type3.json"), "--target", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("0\ttype3\t3,4,5,6,3\t6->3\t", 0), 0u) << r.out;
  const Result untargeted = run({"cycles", "--in", fixture("type3.json")});
  EXPECT_EQ(untargeted.code, 0);
  EXPECT_NE(untargeted.out.find("needs-target"), std::string::npos);
  EXPECT_FALSE(untargeted.err.empty());
}

TEST(Cli, GenerateRejectsOutOfRangeCyclicity) {
  const Result r = run({"generate", "--n", "10", "--cyclicity", "200", "--seed", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, GenerateIsDeterministic) {
  const std::vector<std::string> args{"generate", "--n", "120", "--cyclicity", "25",
                                      "--seed", "7"};
  const Result a = run(args), b = run(args);
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(graph_from_json(a.out).size(), 120u);
}

TEST(Cli, GenerateInfeasibleIsDataError) {
  EXPECT_EQ(run({"generate", "--n", "6", "--cyclicity", "50", "--seed", "1"}).code, 2);
}

TEST(Cli, GenerateBadRatio) {
  EXPECT_EQ(run({"generate", "--n", "60", "--cyclicity", "0", "--seed", "1",
                 "--ratio", "50:30:10"})
                .code,
            1);
}

TEST(Cli, Bench) {
  const Result r = run({"bench", "--sizes", "40,60", "--cyclicities", "0,100",
                        "--reps", "1", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
  EXPECT_EQ(run({"bench", "--sizes", "40,x", "--cyclicities", "0"}).code, 1);
}

TEST(Cli, ScoreWritesGraph) {
  const std::string out = temp_path("scored.json");
  const Result r = run({"score", "--in", fixture("running-example.json"), "--feed",
                        fixture("running-example.feed.json"), "--out", out});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "13\t0.610000\n17\t0.610000\n18\t0.350000\n");
  EXPECT_EQ(read_json(out).node(18).local_prob, 0.35);
  std::filesystem::remove(out);
}

TEST(Cli, ConvertAndDot) {
  const Result plain = run({"convert", "--plain", fixture("wang-acyclic.json")});
  EXPECT_EQ(plain.code, 0) << plain.err;
  EXPECT_EQ(graph_from_json(plain.out).size(), 19u);
  const Result csv =
      run({"convert", "--vertices", fixture("running-example.vertices.csv"), "--arcs",
           fixture("running-example.arcs.csv")});
  EXPECT_EQ(csv.out, read_text_file(fixture("running-example.json")));
  const Result dot = run({"dot", "--in", fixture("fig5.json"), "--probs"});
  EXPECT_NE(dot.out.find("P=0.3360"), std::string::npos);
  EXPECT_EQ(run({"convert"}).code, 1);
}

TEST(Cli, UsageAndDataErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"solve"}).code, 1);
  EXPECT_EQ(run({"solve", "--in", fixture("fig5.json"), "--format", "xml"}).code, 1);
  const Result missing = run({"solve", "--in", "/nonexistent.json"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("IO_ERROR"), std::string::npos);
  EXPECT_EQ(run({"solve", "--in", fixture("fig5.json"), "--node", "Z"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ResourceLimit) {
  std::vector<Node> nodes;
  for (NodeId i = 0; i < 25; ++i) nodes.push_back(leaf(i, 0.5));
  const std::string path = temp_path("wide.json");
  write_json(AttackGraph(nodes, {}), path);
  EXPECT_EQ(run({"circuit", "--in", path, "--node", "0"}).code, 3);
  EXPECT_EQ(run({"circuit", "--in", path, "--node", "0", "--mc", "100"}).code, 0);
  std::filesystem::remove(path);
}
