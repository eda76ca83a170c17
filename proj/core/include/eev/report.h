#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eev/verify.h"

namespace eev {

// One input vector from a CSV file. A trailing column beyond input_dim is
// read as the integer class label.
struct InputRow {
  Vector x;
  std::optional<std::size_t> label;
};

// Header row optional (detected by a non-numeric first field); blank lines
// skipped. Throws ValidationError naming the offending line.
std::vector<InputRow> parse_inputs_csv(const std::string& text, std::size_t input_dim);
std::vector<InputRow> read_inputs_csv(const std::filesystem::path& path, std::size_t input_dim);

struct BatchEntry {
  std::size_t input_index = 0;
  double eps = 0.0;
  RunRecord record;
};

struct BatchOptions {
  Algorithm algorithm = Algorithm::kCombined;
  SolverConfig solver;
  std::optional<ClipRange> clip;
  // Wall-clock limit per query; an expired query is reported UNKNOWN.
  std::optional<double> timeout_seconds;
  unsigned threads = 1;
};

// Runs every (input, eps) pair on a worker pool. Entries come back ordered
// by (eps position, input index) regardless of scheduling.
std::vector<BatchEntry> run_batch(const EENetwork& net, const std::vector<InputRow>& inputs,
                                  const std::vector<double>& eps_list, const BatchOptions& opts);

// Pool width: EEVERIFY_THREADS when set, otherwise `fallback`.
unsigned pool_width(unsigned fallback);

struct TimeStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double median = 0.0;
  std::size_t count = 0;
};
TimeStats time_stats(std::vector<double> seconds);

// #SAFE / (#SAFE + #UNSAFE); empty when no query was decided.
std::optional<double> robustness(std::size_t safe, std::size_t unsafe);

struct EpsSummary {
  double eps = 0.0;
  std::size_t safe = 0;
  std::size_t unsafe = 0;
  std::size_t unknown = 0;
  TimeStats safe_time;
  TimeStats unsafe_time;
  std::optional<double> robustness;
};

// Counts of (inference exit, verification exit) pairs.
struct Heatmap {
  std::vector<ExitId> exits;
  std::vector<std::vector<std::size_t>> counts;  // [inference][verification]

  std::size_t total() const;
  std::size_t diagonal() const;
};

struct BatchReport {
  std::vector<BatchEntry> entries;
  std::vector<EpsSummary> summary;  // ascending eps
  Heatmap heatmap_safe;
  Heatmap heatmap_unsafe;
};

BatchReport aggregate(const EENetwork& net, std::vector<BatchEntry> entries);

// Reports use 6 significant digits for reals and 3 decimals for seconds.
std::string format_real(double v);
std::string format_seconds(double v);

std::string summary_csv(const BatchReport& report);
std::string heatmap_csv(const Heatmap& heatmap);
// One JSON object per line, including the input index and eps.
std::string records_jsonl(const BatchReport& report);

// Threshold sweep: every exit gets the same threshold T. A T = 1 row is
// always present and is verified with the exit-free algorithm, since no gate
// can fire at T = 1.
struct SweepRow {
  double threshold = 0.0;
  bool vanilla_proxy = false;
  std::optional<double> accuracy;  // only when labels are present
  double mean_inference_layers = 0.0;
  std::optional<double> robustness;
  double mean_verify_seconds = 0.0;
  double mean_subproblems = 0.0;
  std::size_t safe = 0;
  std::size_t unsafe = 0;
  std::size_t unknown = 0;
};

std::vector<SweepRow> sweep_threshold(const EENetwork& net, const std::vector<InputRow>& inputs,
                                      double eps, std::vector<double> thresholds,
                                      const BatchOptions& opts);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Per-query comparison of several algorithms on the same (input, eps) pairs.
struct CompareRow {
  std::size_t input_index = 0;
  double eps = 0.0;
  std::vector<RunRecord> records;  // parallel to the algorithm list
  // Two decided verdicts (SAFE vs UNSAFE) disagree. UNKNOWN never counts.
  bool mismatch = false;
};

std::vector<CompareRow> compare_algorithms(const EENetwork& net, const std::vector<InputRow>& inputs,
                                           const std::vector<double>& eps_list,
                                           const std::vector<Algorithm>& algs, BatchOptions opts);
std::string compare_csv(const std::vector<Algorithm>& algs, const std::vector<CompareRow>& rows);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace eev
