#include <gtest/gtest.h>

#include <random>

#include "eev/error.h"
#include "eev/report.h"
#include "fixtures.h"

namespace eev {
namespace {

using testing::Vec;

std::vector<InputRow> RandomInputs(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<InputRow> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({Vector::NullaryExpr(static_cast<Eigen::Index>(dim), [&] { return u(rng); }), i % 2});
  return rows;
}

EENetwork SmallNet() {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.hidden_widths = {6, 6};
  spec.exit_after = {0};
  spec.thresholds = {0.7};
  spec.weight_scale = 3;
  return gen_synthetic(21, spec);
}

TEST(InputsCsv, Parse) {
  const auto rows = parse_inputs_csv("x0,x1,label\n0.1,0.2,1\n\n0.3,0.4,0\n", 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].x, Vec({0.1, 0.2}));
  EXPECT_EQ(rows[0].label, 1u);
  const auto bare = parse_inputs_csv("0.5,0.5\n", 2);
  EXPECT_FALSE(bare[0].label);
  EXPECT_THROW(parse_inputs_csv("0.5\n", 2), ValidationError);
  EXPECT_THROW(parse_inputs_csv("0.5,abc\n", 2), ValidationError);
}

TEST(Batch, Bookkeeping) {
  const EENetwork net = SmallNet();
  const auto inputs = RandomInputs(20, 2, 1);
  BatchOptions opts;
  opts.threads = 3;
  const BatchReport rep = aggregate(net, run_batch(net, inputs, {0.001, 0.01, 0.05}, opts));
  ASSERT_EQ(rep.entries.size(), 60u);
  ASSERT_EQ(rep.summary.size(), 3u);
  for (const EpsSummary& s : rep.summary) EXPECT_EQ(s.safe + s.unsafe + s.unknown, 20u);
  EXPECT_EQ(rep.heatmap_safe.total(), rep.summary[0].safe + rep.summary[1].safe + rep.summary[2].safe);
  for (std::size_t i = 0; i < rep.entries.size(); ++i) EXPECT_EQ(rep.entries[i].input_index, i % 20);
  const std::string csv = summary_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "eps,safe,unsafe,unknown,mean_s_safe,std_s_safe,median_s_safe,mean_s_unsafe,"
            "std_s_unsafe,median_s_unsafe,robustness");
  const std::string jsonl = records_jsonl(rep);
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 60);
}

TEST(Batch, OrderIndependentOfThreads) {
  const EENetwork net = SmallNet();
  const auto inputs = RandomInputs(8, 2, 2);
  BatchOptions one, many;
  many.threads = 4;
  const auto a = run_batch(net, inputs, {0.02, 0.2}, one);
  const auto b = run_batch(net, inputs, {0.02, 0.2}, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].input_index, b[i].input_index);
    EXPECT_EQ(a[i].eps, b[i].eps);
    EXPECT_EQ(a[i].record.verdict.status, b[i].record.verdict.status);
    EXPECT_EQ(a[i].record.solver_calls, b[i].record.solver_calls);
  }
}

TEST(Batch, AllSafeRobustnessIsOne) {
  const EENetwork net = SmallNet();
  const BatchReport rep = aggregate(net, run_batch(net, RandomInputs(10, 2, 3), {0.0}, {}));
  EXPECT_EQ(rep.summary[0].safe, 10u);
  EXPECT_EQ(rep.summary[0].robustness, 1.0);
  EXPECT_EQ(rep.heatmap_safe.diagonal(), rep.heatmap_safe.total());
}

TEST(Stats, TimeStats) {
  const TimeStats s = time_stats({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(time_stats({}).count, 0u);
  EXPECT_FALSE(robustness(0, 0));
  EXPECT_DOUBLE_EQ(*robustness(3, 1), 0.75);
}

TEST(Stats, Spearman) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4, 5}, {2, 4, 6, 8, 100}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 1, 2, 2}), 0.894427, 1e-6);
}

TEST(Sweep, AddsVanillaRow) {
  const EENetwork net = SmallNet();
  const auto rows = sweep_threshold(net, RandomInputs(5, 2, 4), 0.01, {0.9, 0.6}, {});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].threshold, 0.6);
  EXPECT_EQ(rows[1].threshold, 0.9);
  EXPECT_EQ(rows[2].threshold, 1.0);
  EXPECT_TRUE(rows[2].vanilla_proxy);
  EXPECT_TRUE(rows[0].accuracy);
  EXPECT_THROW(sweep_threshold(net, RandomInputs(1, 2, 4), 0.01, {0.5}, {}), ValidationError);
}

TEST(Compare, FlagsNoMismatchOnConsistentAlgorithms) {
  const EENetwork net = SmallNet();
  const std::vector<Algorithm> algs{Algorithm::kBaseline, Algorithm::kCombined};
  const auto rows = compare_algorithms(net, RandomInputs(6, 2, 5), {0.01, 0.1}, algs, {});
  ASSERT_EQ(rows.size(), 12u);
  for (const CompareRow& r : rows) EXPECT_FALSE(r.mismatch);
  const std::string csv = compare_csv(algs, rows);
  EXPECT_NE(csv.find("baseline_verdict"), std::string::npos);
  EXPECT_NE(csv.find("verdict_mismatch"), std::string::npos);
}

}  // namespace
}  // namespace eev
