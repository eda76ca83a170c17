#pragma once

#include <chrono>
#include <optional>

#include "eev/atom.h"
#include "eev/interval.h"
#include "eev/network.h"

namespace eev {

enum class SolveStatus { kSat, kUnsat, kUnknown };
const char* to_string(SolveStatus status);

enum class SplitRule { kWidestDimension };

struct SolverConfig {
  // Boxes whose widest side is at most delta are not split further.
  double delta = 1e-4;
  std::size_t max_subproblems = 1'000'000;
  SplitRule split = SplitRule::kWidestDimension;
  // Sequential depth-first search, lower half first. When false and
  // workers > 1 the worklist is shared by a thread pool.
  bool deterministic = true;
  unsigned workers = 1;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  void validate() const;
};

struct SolveStats {
  std::size_t subproblems = 0;
  std::size_t max_depth = 0;
  std::size_t residual_boxes = 0;
  double wall_seconds = 0.0;
  bool budget_exhausted = false;
  bool timed_out = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  std::optional<Vector> witness;  // present iff kSat
  SolveStats stats;
};

// Decides whether some point of `box` satisfies every atom of `conj` by
// input-splitting branch and bound over interval bounds.
//
//  * SAT     a witness inside the box satisfying every atom exactly.
//  * UNSAT   every sub-box was pruned by an interval proof.
//  * UNKNOWN sub-boxes reached the delta floor undecided, or the budget or
//            deadline ran out first.
SolveResult solve(const EENetwork& net, const BoxDomain& box, const Conjunction& conj,
                  const SolverConfig& cfg = {});

}  // namespace eev
