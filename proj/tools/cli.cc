#include "cli.h"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "eev/error.h"
#include "eev/network_io.h"
#include "eev/report.h"
#include "eev/synthetic.h"
#include "eev/verify.h"

namespace eev::cli {
namespace {

namespace fs = std::filesystem;

std::vector<double> ParseReals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError(what, "malformed number '" + tok + "'");
    }
  }
  if (out.empty()) throw ValidationError(what, "expected a comma-separated list");
  return out;
}

std::vector<std::size_t> ParseCounts(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (double v : ParseReals(text, what)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ValidationError(what, "expected non-negative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::optional<ClipRange> ParseClip(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const std::vector<double> v = ParseReals(text, "--clip");
  if (v.size() != 2 || v[0] > v[1]) throw ValidationError("--clip", "expected LO,HI with LO <= HI");
  return ClipRange{v[0], v[1]};
}

// --input accepts a CSV file (first row is used) or inline numbers.
Vector ParseInput(const std::string& text, std::size_t input_dim) {
  if (fs::is_regular_file(text)) {
    const std::vector<InputRow> rows = read_inputs_csv(text, input_dim);
    if (rows.empty()) throw ValidationError("--input", "file contains no rows");
    return rows.front().x;
  }
  const std::vector<double> v = ParseReals(text, "--input");
  if (v.size() != input_dim) {
    throw ValidationError("--input", "expected " + std::to_string(input_dim) + " values");
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path.string(), "cannot open for writing");
  out << content;
  if (!out) throw ValidationError(path.string(), "write failed");
}

void Emit(const std::string& out_path, const std::string& content, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << content;
  } else {
    WriteFile(out_path, content);
  }
}

struct SolverFlags {
  double delta = 1e-4;
  std::size_t budget = 1'000'000;
  bool deterministic = false;
  std::string clip;
  double timeout = 0.0;

  void Register(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "Minimum box width before a branch is left undecided")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--budget", budget, "Subproblem budget per solver call")->check(CLI::PositiveNumber);
    cmd->add_option("--clip", clip, "Data range LO,HI the ball is intersected with");
    cmd->add_flag("--deterministic", deterministic, "Sequential depth-first search in every solver call");
  }

  BatchOptions Batch(Algorithm alg) const {
    BatchOptions opts;
    opts.algorithm = alg;
    opts.solver.delta = delta;
    opts.solver.max_subproblems = budget;
    opts.solver.deterministic = true;  // parallelism lives across queries
    opts.clip = ParseClip(clip);
    if (timeout > 0.0) opts.timeout_seconds = timeout;
    opts.threads = pool_width(std::thread::hardware_concurrency());
    return opts;
  }
};

int ExitCodeFor(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kSafe: return kSafe;
    case VerdictStatus::kUnsafe: return kUnsafe;
    case VerdictStatus::kUnknown: return kUnknown;
  }
  return kInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local-robustness verification for early-exit ReLU networks", "eeverify"};
  app.require_subcommand(1);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Verify one input; exit code 0 SAFE, 1 UNSAFE, 2 UNKNOWN");
  std::string net_path, input_text, alg_name = "combined";
  double eps = 0.0;
  bool log_calls = false;
  SolverFlags verify_flags;
  verify_cmd->add_option("--net", net_path, "Network interchange JSON")->required();
  verify_cmd->add_option("--input", input_text, "CSV file or inline comma-separated vector")->required();
  verify_cmd->add_option("--eps", eps, "l-infinity radius")->required()->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--alg", alg_name, "baseline|break|continue|combined|vanilla");
  verify_cmd->add_option("--timeout", verify_flags.timeout, "Wall-clock limit in seconds");
  verify_cmd->add_flag("--log-calls", log_calls, "Include every solver call with its atoms");
  verify_flags.Register(verify_cmd);

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "Verify every (input, eps) pair and write reports");
  std::string inputs_path, eps_list, out_dir;
  SolverFlags batch_flags;
  batch_cmd->add_option("--net", net_path)->required();
  batch_cmd->add_option("--inputs", inputs_path, "CSV, one vector per row, optional label column")->required();
  batch_cmd->add_option("--eps-list", eps_list, "Comma-separated radii")->required();
  batch_cmd->add_option("--alg", alg_name);
  batch_cmd->add_option("--out", out_dir, "Output directory")->required();
  batch_cmd->add_option("--timeout-per-query", batch_flags.timeout, "Seconds; expired queries are UNKNOWN");
  batch_flags.timeout = 60.0;
  batch_flags.Register(batch_cmd);

  // compare-algs
  auto* compare_cmd = app.add_subcommand("compare-algs", "Run several algorithms on the same queries");
  std::string algs_text = "baseline,break,continue,combined", out_path;
  SolverFlags compare_flags;
  compare_cmd->add_option("--net", net_path)->required();
  compare_cmd->add_option("--inputs", inputs_path)->required();
  compare_cmd->add_option("--eps-list", eps_list)->required();
  compare_cmd->add_option("--algs", algs_text, "Comma-separated algorithm names");
  compare_cmd->add_option("--out", out_path, "CSV path (stdout when omitted)");
  compare_cmd->add_option("--timeout-per-query", compare_flags.timeout);
  compare_flags.Register(compare_cmd);

  // sweep-threshold
  auto* sweep_cmd = app.add_subcommand("sweep-threshold", "Accuracy, latency and robustness per threshold");
  std::string thresholds_text;
  SolverFlags sweep_flags;
  sweep_cmd->add_option("--net", net_path)->required();
  sweep_cmd->add_option("--inputs", inputs_path)->required();
  sweep_cmd->add_option("--eps", eps)->required()->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--thresholds", thresholds_text, "Comma-separated values, all > 0.5")->required();
  sweep_cmd->add_option("--alg", alg_name);
  sweep_cmd->add_option("--out", out_path);
  sweep_cmd->add_option("--timeout-per-query", sweep_flags.timeout);
  sweep_flags.Register(sweep_cmd);

  // gen-synthetic
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a random network");
  std::uint64_t seed = 0;
  SyntheticSpec spec;
  std::string hidden_text = "8", exits_text, gen_thresholds = "0.9";
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--input-dim", spec.input_dim)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--classes", spec.num_classes)->check(CLI::Range(2, 1 << 20));
  gen_cmd->add_option("--hidden", hidden_text, "Hidden widths, e.g. 8,8");
  gen_cmd->add_option("--exits", exits_text, "Backbone layers carrying an exit, e.g. 0,1");
  gen_cmd->add_option("--thresholds", gen_thresholds, "One per exit or one shared value");
  gen_cmd->add_option("--scale", spec.weight_scale, "Weights uniform in [-s,s], s = scale/sqrt(fan_in)");
  gen_cmd->add_option("--out", out_path)->required();

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "Early-exit inference on one input");
  infer_cmd->add_option("--net", net_path)->required();
  infer_cmd->add_option("--input", input_text)->required();

  std::vector<std::string> argv_store{"eeverify"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "eeverify: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*verify_cmd) {
      const EENetwork net = load_network(net_path);
      const Vector x = ParseInput(input_text, net.input_dim());
      const QuerySpec q = make_query(net, x, eps, ParseClip(verify_flags.clip));
      SolverConfig cfg;
      cfg.delta = verify_flags.delta;
      cfg.max_subproblems = verify_flags.budget;
      cfg.deterministic = verify_flags.deterministic;
      cfg.workers = verify_flags.deterministic ? 1 : pool_width(std::thread::hardware_concurrency());
      if (verify_flags.timeout > 0.0) {
        cfg.deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(verify_flags.timeout));
      }
      const RunRecord rec = verify(algorithm_from_string(alg_name), q, cfg);
      out << to_json(rec, log_calls) << "\n";
      return ExitCodeFor(rec.verdict.status);
    }
    if (*batch_cmd) {
      const EENetwork net = load_network(net_path);
      const std::vector<InputRow> inputs = read_inputs_csv(inputs_path, net.input_dim());
      const std::vector<double> radii = ParseReals(eps_list, "--eps-list");
      const BatchOptions opts = batch_flags.Batch(algorithm_from_string(alg_name));
      const BatchReport report = aggregate(net, run_batch(net, inputs, radii, opts));
      fs::create_directories(out_dir);
      WriteFile(fs::path(out_dir) / "records.jsonl", records_jsonl(report));
      WriteFile(fs::path(out_dir) / "summary.csv", summary_csv(report));
      WriteFile(fs::path(out_dir) / "heatmap_safe.csv", heatmap_csv(report.heatmap_safe));
      WriteFile(fs::path(out_dir) / "heatmap_unsafe.csv", heatmap_csv(report.heatmap_unsafe));
      out << summary_csv(report);
      return kOk;
    }
    if (*compare_cmd) {
      const EENetwork net = load_network(net_path);
      const std::vector<InputRow> inputs = read_inputs_csv(inputs_path, net.input_dim());
      std::vector<Algorithm> algs;
      std::stringstream ss(algs_text);
      for (std::string tok; std::getline(ss, tok, ',');) algs.push_back(algorithm_from_string(tok));
      if (algs.empty()) throw ValidationError("--algs", "no algorithms given");
      const auto rows = compare_algorithms(net, inputs, ParseReals(eps_list, "--eps-list"), algs,
                                           compare_flags.Batch(algs.front()));
      Emit(out_path, compare_csv(algs, rows), out);
      return kOk;
    }
    if (*sweep_cmd) {
      const EENetwork net = load_network(net_path);
      const std::vector<InputRow> inputs = read_inputs_csv(inputs_path, net.input_dim());
      const auto rows = sweep_threshold(net, inputs, eps, ParseReals(thresholds_text, "--thresholds"),
                                        sweep_flags.Batch(algorithm_from_string(alg_name)));
      Emit(out_path, sweep_csv(rows), out);
      return kOk;
    }
    if (*gen_cmd) {
      spec.hidden_widths = ParseCounts(hidden_text, "--hidden");
      spec.exit_after = ParseCounts(exits_text, "--exits");
      spec.thresholds = spec.exit_after.empty() ? std::vector<double>{}
                                                : ParseReals(gen_thresholds, "--thresholds");
      save_network(gen_synthetic(seed, spec), out_path);
      return kOk;
    }
    if (*infer_cmd) {
      const EENetwork net = load_network(net_path);
      const InferenceResult r = infer(net, ParseInput(input_text, net.input_dim()));
      out << "{\"exit\": \"" << r.exit_index.label() << "\", \"class\": " << r.predicted_class
          << ", \"prob\": " << format_real(r.probs[static_cast<Eigen::Index>(r.predicted_class)])
          << "}\n";
      return kOk;
    }
  } catch (const InternalError& e) {
    err << "eeverify: internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    err << "eeverify: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace eev::cli
