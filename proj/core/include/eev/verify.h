#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eev/queries.h"
#include "eev/solver.h"

namespace eev {

enum class VerdictStatus { kSafe, kUnsafe, kUnknown };
const char* to_string(VerdictStatus status);

enum class Algorithm { kBaseline, kBreak, kContinue, kCombined, kVanilla };
const char* to_string(Algorithm alg);
Algorithm algorithm_from_string(const std::string& name);

// Which probe a solver call served.
enum class CallKind { kRunnerUp, kBreak, kContinue, kVanilla };
const char* to_string(CallKind kind);

struct Verdict {
  VerdictStatus status = VerdictStatus::kUnknown;
  std::optional<Vector> counterexample;
  std::optional<ExitId> cex_exit;
  std::optional<std::size_t> cex_class;
};

struct SolverCall {
  CallKind kind = CallKind::kRunnerUp;
  ExitId exit = ExitId::Last();
  std::optional<std::size_t> runner_up;
  SolveStatus status = SolveStatus::kUnknown;
  std::size_t subproblems = 0;
  double seconds = 0.0;
  Conjunction conj;
};

struct ExitBreakdown {
  ExitId exit = ExitId::Last();
  std::size_t calls = 0;
  std::size_t subproblems = 0;
  double seconds = 0.0;
};

struct RunRecord {
  Verdict verdict;
  Algorithm algorithm = Algorithm::kCombined;
  double wall_seconds = 0.0;
  std::size_t solver_calls = 0;
  std::size_t subproblems_total = 0;
  // Deepest exit at which the run concluded: where break fired, where the
  // counterexample was found, or LAST when the loop ran to completion.
  ExitId verification_exit = ExitId::Last();
  ExitId inference_exit = ExitId::Last();
  std::size_t winner = 0;
  std::size_t unknown_subqueries = 0;
  bool timed_out = false;
  std::vector<ExitBreakdown> per_exit;
  std::vector<SolverCall> calls;

  std::size_t calls_of(CallKind kind) const;
};

// Result of the runner-up loop at a single exit.
struct ExitSearch {
  VerdictStatus status = VerdictStatus::kSafe;
  std::optional<Vector> counterexample;
  std::optional<std::size_t> runner_up;
};

// Algorithm entry points. Each returns a fully instrumented record; UNSAFE
// counterexamples are re-checked (in-ball, misclassified under exact
// inference) before being returned.
RunRecord verify_baseline(const QuerySpec& q, const SolverConfig& cfg = {});
RunRecord verify_break(const QuerySpec& q, const SolverConfig& cfg = {});
RunRecord verify_continue(const QuerySpec& q, const SolverConfig& cfg = {});
RunRecord verify_combined(const QuerySpec& q, const SolverConfig& cfg = {});
RunRecord verify_vanilla(const QuerySpec& q, const SolverConfig& cfg = {});
RunRecord verify(Algorithm alg, const QuerySpec& q, const SolverConfig& cfg = {});

// Runner-up loop of exit k in ascending class order; stops at the first SAT.
// Calls are appended to `record` when given.
ExitSearch exists_prev_cex(const QuerySpec& q, ExitId k, const SolverConfig& cfg,
                           RunRecord* record = nullptr);

// `include_calls` adds the per-call log including atom lists.
std::string to_json(const RunRecord& record, bool include_calls = false);

}  // namespace eev
