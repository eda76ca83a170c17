#pragma once

#include <cstdint>
#include <optional>

#include "eev/queries.h"

namespace eev {

// Independent ground truth for the verifier. Everything here reasons about
// misclassification under infer() directly and never builds the runner-up
// decomposition used by the algorithms.

struct AttackBudget {
  std::size_t random_samples = 2000;
  std::size_t grid_points_per_dim = 21;
  std::size_t refinement_steps = 200;
  std::uint64_t seed = 0;
};

// Uniform grid, then uniform random samples, then coordinate descent on the
// winner's margin from the most promising points. Returns the first point of
// the ball that infer() does not classify as the winner.
std::optional<Vector> attack_search(const QuerySpec& q, const AttackBudget& budget = {});

enum class OracleStatus { kSafe, kUnsafe, kUndecided };
const char* to_string(OracleStatus status);

struct ReferenceConfig {
  AttackBudget attack;
  // Resolution of the certification pass and its box budget (a hundredth of
  // the engine's delta and a hundred times its budget by default).
  double delta = 1e-6;
  std::size_t max_boxes = 100'000'000;
  // Input-space margin an instance needs to count as decisive.
  double decisive_margin = 1e-3;
  // Give up on the certification pass as soon as the instance is known to
  // be indecisive (status then reports kUndecided).
  bool stop_when_indecisive = false;
  std::size_t max_input_dim = 3;
};

struct OracleEffort {
  std::size_t samples = 0;
  std::size_t grid_resolution = 0;
  std::size_t refinement_iterations = 0;
  std::size_t certification_boxes = 0;
};

struct OracleVerdict {
  OracleStatus status = OracleStatus::kUndecided;
  std::optional<Vector> witness;
  OracleEffort effort;
  // SAFE: width of the smallest box the certification pass had to prove.
  // UNSAFE: half-width of the largest box around a witness found entirely
  // misclassified (grid-checked). Zero when unknown.
  double margin = 0.0;
  bool decisive = false;
};

// UNSAFE if the attack finds a misclassified point; otherwise SAFE if a
// fine-resolution branch and bound proves every point of the ball is
// classified as the winner; otherwise UNDECIDED. The certification path is
// refused for input_dim > cfg.max_input_dim.
OracleVerdict decide_reference(const QuerySpec& q, const ReferenceConfig& cfg = {});

// Fraction of uniform samples from the ball whose trace equals the centre's.
double trace_stability_estimate(const QuerySpec& q, std::size_t samples, std::uint64_t seed = 0);

// Signed margin by which x is classified as `winner` (negative when it is
// not): at the exit that fires, p_winner - T; at the last layer,
// logit_winner - max other logit.
double winner_margin(const EENetwork& net, const Vector& x, std::size_t winner);

}  // namespace eev
