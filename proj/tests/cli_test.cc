#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.h"
#include "eev/network_io.h"
#include "fixtures.h"
#include "json.hpp"

namespace eev {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("eev_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    net_ = (dir_ / "fixture.json").string();
    save_network(testing::FixtureA(), net_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  std::string net_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, VerifySafeBreaksAtExit1) {
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "3,0", "--eps", "0.2", "--alg", "combined"}), cli::kSafe);
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_EQ(j["verdict"], "SAFE");
  EXPECT_EQ(j["verification_exit"], "exit1");
}

TEST_F(Cli, VerifyZeroEps) {
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "3,0", "--eps", "0"}), cli::kSafe);
}

TEST_F(Cli, VerifyUnsafeAndUnknownCodes) {
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "0.2,0", "--eps", "0.5", "--deterministic"}), cli::kUnsafe);
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "1.5,0.5", "--eps", "0.5", "--delta", "0.001"}),
            cli::kUnknown);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(Run({"verify", "--input", "3,0", "--eps", "0.2"}), cli::kUsage);
  EXPECT_FALSE(err_.str().empty());
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "3", "--eps", "0.2"}), cli::kUsage);
  EXPECT_EQ(Run({"verify", "--net", (dir_ / "missing.json").string(), "--input", "3,0", "--eps", "0.2"}), cli::kUsage);
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", "3,0", "--eps", "0.2", "--alg", "fast"}), cli::kUsage);
  EXPECT_EQ(Run({"frobnicate"}), cli::kUsage);
}

TEST_F(Cli, InputFromCsvFile) {
  std::ofstream(dir_ / "x.csv") << "x0,x1\n3,0\n";
  EXPECT_EQ(Run({"verify", "--net", net_, "--input", (dir_ / "x.csv").string(), "--eps", "0.2"}), cli::kSafe);
}

TEST_F(Cli, BatchWritesReports) {
  std::ofstream(dir_ / "in.csv") << "3,0\n0.2,0\n0,3\n";
  const fs::path out = dir_ / "out";
  EXPECT_EQ(Run({"batch", "--net", net_, "--inputs", (dir_ / "in.csv").string(), "--eps-list", "0,0.2,0.5",
                 "--out", out.string()}),
            cli::kOk);
  for (const char* f : {"records.jsonl", "summary.csv", "heatmap_safe.csv", "heatmap_unsafe.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  std::ifstream rec(out / "records.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(rec, l);) ++lines;
  EXPECT_EQ(lines, 9u);
}

TEST_F(Cli, SweepAndCompare) {
  std::ofstream(dir_ / "in.csv") << "3,0\n0.2,0\n";
  EXPECT_EQ(Run({"sweep-threshold", "--net", net_, "--inputs", (dir_ / "in.csv").string(), "--eps", "0.1",
                 "--thresholds", "0.6,0.9"}),
            cli::kOk);
  std::size_t lines = 0;
  for (char c : out_.str()) lines += c == '\n';
  EXPECT_EQ(lines, 4u);  // header + 2 thresholds + vanilla row
  EXPECT_EQ(Run({"compare-algs", "--net", net_, "--inputs", (dir_ / "in.csv").string(), "--eps-list", "0.1"}),
            cli::kOk);
  EXPECT_NE(out_.str().find("combined_verdict"), std::string::npos);
}

TEST_F(Cli, GenAndInfer) {
  const std::string path = (dir_ / "gen.json").string();
  EXPECT_EQ(Run({"gen-synthetic", "--seed", "3", "--input-dim", "2", "--classes", "3", "--hidden", "5,5",
                 "--exits", "0", "--thresholds", "0.8", "--out", path}),
            cli::kOk);
  EXPECT_EQ(load_network(path).num_exits(), 1u);
  EXPECT_EQ(Run({"infer", "--net", net_, "--input", "3,0"}), cli::kOk);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["exit"], "exit1");
}

}  // namespace
}  // namespace eev
