#include "eev/solver.h"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

#include "eev/error.h"

namespace eev {
namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  BoxDomain box;
  std::size_t depth;
};

enum class BoxOutcome { kPruned, kWitness, kResidual, kSplit };

// One branch-and-bound step on a single box. On kWitness `witness` is set.
BoxOutcome Examine(const EENetwork& net, const BoxDomain& box, const Conjunction& conj,
                   double delta, Vector& witness) {
  const LayerBounds bounds = propagate(net, box);
  bool all_always = true;
  for (const auto& atom : conj.atoms) {
    const AtomStatus s = atom_status(atom, bounds);
    if (s == AtomStatus::kNever) return BoxOutcome::kPruned;
    all_always = all_always && s == AtomStatus::kAlways;
  }
  Vector center = box.center();
  const bool center_ok = eval_atoms_exact(net, center, conj);
  if (all_always && !center_ok) {
    throw InternalError("interval proof says every atom holds but the box center fails");
  }
  if (center_ok) {
    witness = std::move(center);
    return BoxOutcome::kWitness;
  }
  if (box.max_width() <= delta) return BoxOutcome::kResidual;
  return BoxOutcome::kSplit;
}

bool PastDeadline(const SolverConfig& cfg) {
  return cfg.deadline && Clock::now() >= *cfg.deadline;
}

SolveResult SolveSequential(const EENetwork& net, const BoxDomain& root, const Conjunction& conj,
                            const SolverConfig& cfg) {
  SolveResult result;
  std::vector<Node> stack;
  stack.push_back({root, 0});
  while (!stack.empty()) {
    if (result.stats.subproblems >= cfg.max_subproblems) {
      result.stats.budget_exhausted = true;
      return result;
    }
    if ((result.stats.subproblems & 63u) == 0 && PastDeadline(cfg)) {
      result.stats.timed_out = true;
      return result;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++result.stats.subproblems;
    result.stats.max_depth = std::max(result.stats.max_depth, node.depth);

    Vector witness;
    switch (Examine(net, node.box, conj, cfg.delta, witness)) {
      case BoxOutcome::kPruned: break;
      case BoxOutcome::kWitness:
        result.status = SolveStatus::kSat;
        result.witness = std::move(witness);
        return result;
      case BoxOutcome::kResidual: ++result.stats.residual_boxes; break;
      case BoxOutcome::kSplit: {
        auto [lower, upper] = node.box.bisect(node.box.widest_dim());
        // Upper half pushed first so the lower half is explored first.
        stack.push_back({std::move(upper), node.depth + 1});
        stack.push_back({std::move(lower), node.depth + 1});
        break;
      }
    }
  }
  result.status =
      result.stats.residual_boxes == 0 ? SolveStatus::kUnsat : SolveStatus::kUnknown;
  return result;
}

// Shared-worklist variant. Any worker's witness cancels the rest; UNSAT and
// residual accounting do not depend on scheduling as long as the budget is
// not hit.
class ParallelSearch {
 public:
  ParallelSearch(const EENetwork& net, const Conjunction& conj, const SolverConfig& cfg)
      : net_(net), conj_(conj), cfg_(cfg) {}

  SolveResult Run(const BoxDomain& root) {
    work_.push_back({root, 0});
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < cfg_.workers; ++t) pool.emplace_back([this] { Worker(); });
    for (auto& th : pool) th.join();
    if (error_) std::rethrow_exception(error_);

    SolveResult result;
    result.stats = stats_;
    if (witness_) {
      result.status = SolveStatus::kSat;
      result.witness = std::move(witness_);
    } else if (stats_.budget_exhausted || stats_.timed_out || stats_.residual_boxes > 0) {
      result.status = SolveStatus::kUnknown;
    } else {
      result.status = SolveStatus::kUnsat;
    }
    return result;
  }

 private:
  void Worker() {
    std::unique_lock lock(mu_);
    while (true) {
      cv_.wait(lock, [this] { return stop_ || !work_.empty() || in_flight_ == 0; });
      if (stop_ || work_.empty()) {
        cv_.notify_all();
        return;
      }
      if (stats_.subproblems >= cfg_.max_subproblems) {
        stats_.budget_exhausted = true;
        Stop();
        return;
      }
      if (PastDeadline(cfg_)) {
        stats_.timed_out = true;
        Stop();
        return;
      }
      Node node = std::move(work_.back());
      work_.pop_back();
      ++stats_.subproblems;
      stats_.max_depth = std::max(stats_.max_depth, node.depth);
      ++in_flight_;
      lock.unlock();

      Vector witness;
      BoxOutcome outcome = BoxOutcome::kPruned;
      std::exception_ptr error;
      try {
        outcome = Examine(net_, node.box, conj_, cfg_.delta, witness);
      } catch (...) {
        error = std::current_exception();
      }

      lock.lock();
      --in_flight_;
      if (error) {
        error_ = error;
        Stop();
        return;
      }
      switch (outcome) {
        case BoxOutcome::kPruned: break;
        case BoxOutcome::kWitness:
          if (!witness_) witness_ = std::move(witness);
          Stop();
          return;
        case BoxOutcome::kResidual: ++stats_.residual_boxes; break;
        case BoxOutcome::kSplit: {
          auto [lower, upper] = node.box.bisect(node.box.widest_dim());
          work_.push_back({std::move(upper), node.depth + 1});
          work_.push_back({std::move(lower), node.depth + 1});
          break;
        }
      }
      cv_.notify_all();
    }
  }

  void Stop() {
    stop_ = true;
    cv_.notify_all();
  }

  const EENetwork& net_;
  const Conjunction& conj_;
  const SolverConfig& cfg_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Node> work_;
  std::size_t in_flight_ = 0;
  bool stop_ = false;
  SolveStats stats_;
  std::optional<Vector> witness_;
  std::exception_ptr error_;
};

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kSat: return "SAT";
    case SolveStatus::kUnsat: return "UNSAT";
    case SolveStatus::kUnknown: return "UNKNOWN";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta", "must be > 0");
  if (max_subproblems == 0) throw ValidationError("max_subproblems", "must be >= 1");
  if (workers == 0) throw ValidationError("workers", "must be >= 1");
}

SolveResult solve(const EENetwork& net, const BoxDomain& box, const Conjunction& conj,
                  const SolverConfig& cfg) {
  cfg.validate();
  validate(net, conj);
  if (box.size() != net.input_dim()) {
    throw ValidationError("box", "dimension does not match network input");
  }
  const auto start = Clock::now();
  SolveResult result = (cfg.deterministic || cfg.workers <= 1)
                           ? SolveSequential(net, box, conj, cfg)
                           : ParallelSearch(net, conj, cfg).Run(box);
  result.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  if (result.status == SolveStatus::kSat) {
    if (!result.witness || !box.contains(*result.witness) ||
        !eval_atoms_exact(net, *result.witness, conj)) {
      throw InternalError("solver witness failed exact re-evaluation");
    }
  }
  return result;
}

}  // namespace eev
