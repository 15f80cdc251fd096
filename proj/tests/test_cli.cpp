#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "corpusplay/cli.hpp"
#include "corpusplay/config.hpp"
#include "corpusplay/run_store.hpp"
#include "test_util.hpp"

using nlohmann::json;
namespace cli = corpusplay::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "corpusplay");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Ingests a small corpus and writes a config next to it.
std::filesystem::path setup_run(const cptest::TempDir& dir) {
  std::ofstream in(dir / "raw.jsonl");
  for (int i = 0; i < 12; ++i) in << json{{"text", "Record " + std::to_string(i) + " on river deltas."}}.dump() << "\n";
  in.close();
  auto r = invoke({"ingest", "--input", (dir / "raw.jsonl").string(), "--store", (dir / "store.jsonl").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ofstream(dir / "cfg.json") << R"({"B": 2, "N": 8, "T": 2, "seed": 3, "concurrency": 2,
    "corpus": {"path": "store.jsonl"}})";
  return dir / "cfg.json";
}

}  // namespace

TEST(Cli, HelpListsCommandsAndKeys) {
  auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* cmd : {"ingest", "run", "crossplay", "simulate", "verify", "reward", "serve"})
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  for (const auto& key : corpusplay::config_keys()) EXPECT_NE(r.out.find(key), std::string::npos) << key;
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--type", "Integer"}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--scheme", "bogus", "--steps", "5"}).code, 2);
  EXPECT_EQ(invoke({"serve", "--run", "/nonexistent/run/dir"}).code, 2);
  EXPECT_EQ(invoke({"reward", "--labels", "1,x"}).code, 2);
}

TEST(Cli, Verify) {
  auto ok = invoke({"verify", "--type", "Integer", "--gold", "42", "--candidate", "42.0"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(json::parse(ok.out)["equivalent"], true);
  auto boxed = invoke({"verify", "--type", "Integer", "--gold", "42", "--candidate", "so \\boxed{43}"});
  EXPECT_EQ(boxed.code, 1);
  EXPECT_EQ(json::parse(boxed.out)["candidate"], "43");
  EXPECT_EQ(invoke({"verify", "--type", "Number", "--gold", "1", "--candidate", "1"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--type", "Integer", "--gold", "0.5", "--candidate", "1/2"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--type", "Expression", "--gold", "2x+2", "--candidate", "2(x+1)"}).code, 0);
}

TEST(Cli, Reward) {
  auto r = invoke({"reward", "--labels", "1,1,1,1,0,0,0,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["reward"], 1.0);
  EXPECT_EQ(j["schemes"]["rzero"], 1.0);
  auto inv = invoke({"reward", "--invalid", "--scheme", "threshold"});
  EXPECT_EQ(json::parse(inv.out)["reward"], -0.1);
  cptest::TempDir dir;
  auto curve = invoke({"reward", "--curve", (dir / "curve.csv").string()});
  EXPECT_EQ(curve.code, 0);
  std::ifstream in(dir / "curve.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(count_lines(ss.str()), 102u);
  EXPECT_EQ(ss.str().rfind("p,variance,absolute_zero,threshold,rzero\n", 0), 0u);
  EXPECT_EQ(invoke({"reward"}).code, 2);
}

TEST(Cli, IngestReportsCounts) {
  cptest::TempDir dir;
  std::ofstream(dir / "raw.jsonl") << "{\"text\": \"alpha\"}\nnot json\n{\"text\": \"  \"}\n{\"text\": \"beta\", \"source\": \"wiki\"}\n";
  auto r = invoke({"ingest", "--input", (dir / "raw.jsonl").string(), "--store", (dir / "s.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["records"], 4);
  EXPECT_EQ(j["malformed"], 1);
  EXPECT_EQ(j["empty"], 1);
  EXPECT_EQ(j["added"], 2);
  auto again = invoke({"ingest", "--input", (dir / "raw.jsonl").string(), "--store", (dir / "s.jsonl").string(),
                       "--append"});
  EXPECT_EQ(json::parse(again.out)["store_size"], 4);
  EXPECT_EQ(invoke({"ingest", "--input", (dir / "missing.jsonl").string(), "--store", (dir / "x").string()}).code,
            1);
}

TEST(Cli, RunWritesBatchesAndSnapshot) {
  cptest::TempDir dir;
  auto cfg = setup_run(dir);
  auto out = dir / "run";
  auto r = invoke({"run", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("iteration 2:"), std::string::npos);
  corpusplay::RunStore rs(out);
  EXPECT_EQ(rs.last_completed(), 2);
  auto snap = json::parse(corpusplay::read_file(rs.config_path()));
  EXPECT_EQ(snap["config_hash"], rs.read_manifest(1)["config_hash"]);
  EXPECT_EQ(snap["config_hash"], rs.read_manifest(2)["config_hash"]);

  EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", out.string(), "--set", "B=notanumber"}).code, 2);
  EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", out.string(), "--set", "Q=1"}).code, 2);
  // Same directory, different content: a resume conflict.
  EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", out.string(), "--set", "B=3"}).code, 1);
  EXPECT_EQ(invoke({"run", "--out", out.string()}).code, 2);  // no corpus.path
}

TEST(Cli, RunStopAfterThenResume) {
  cptest::TempDir dir;
  auto cfg = setup_run(dir);
  auto out = dir / "run";
  auto first = invoke({"run", "--config", cfg.string(), "--out", out.string(), "--stop-after", "1"});
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(corpusplay::RunStore(out).last_completed(), 1);
  auto second = invoke({"run", "--config", cfg.string(), "--out", out.string()});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(corpusplay::RunStore(out).last_completed(), 2);
}

TEST(Cli, Crossplay) {
  cptest::TempDir dir;
  auto cfg = setup_run(dir);
  auto r = invoke({"crossplay", "--config", cfg.string(), "--out", (dir / "cp").string(), "--docs", "4",
                   "--attempts", "8", "--challenger-id", "c1", "--reasoner-id", "r1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["challenger_id"], "c1");
  EXPECT_EQ(j["documents_used"].get<int>() + j["documents_without_task"].get<int>(), 4);
  std::ifstream csv(dir / "cp" / "crossplay.csv");
  std::stringstream ss;
  ss << csv.rdbuf();
  EXPECT_EQ(count_lines(ss.str()), 1u + j["tasks"].get<std::size_t>());
  EXPECT_TRUE(std::filesystem::exists(dir / "cp" / "crossplay.json"));
}

TEST(Cli, SimulateToStdoutAndFile) {
  auto r = invoke({"simulate", "--steps", "10", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 11u);
  cptest::TempDir dir;
  auto f = invoke({"simulate", "--steps", "10", "--out", (dir / "sim").string(), "--freeze-at", "5"});
  EXPECT_EQ(f.code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "sim" / "simulation.csv"));
  EXPECT_EQ(invoke({"simulate", "--steps", "10", "--freeze-at", "50"}).code, 2);
}
