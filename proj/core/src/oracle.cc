#include "eev/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "eev/atom.h"
#include "eev/error.h"
#include "eev/interval.h"

namespace eev {
namespace {

bool Misclassified(const EENetwork& net, const Vector& x, std::size_t winner) {
  return infer(net, x).predicted_class != winner;
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vector SampleBox(const BoxDomain& box, std::mt19937_64& rng) {
  Vector x(static_cast<Eigen::Index>(box.size()));
  for (std::size_t d = 0; d < box.size(); ++d) {
    x[static_cast<Eigen::Index>(d)] = box[d].lo + Uniform01(rng) * box[d].width();
  }
  return x;
}

// Visits every point of a regular grid with `per_dim` points per axis
// (endpoints included) until `visit` returns true.
template <typename Visit>
bool ForEachGridPoint(const BoxDomain& box, std::size_t per_dim, Visit&& visit) {
  const std::size_t n = box.size();
  std::vector<std::size_t> idx(n, 0);
  Vector x(static_cast<Eigen::Index>(n));
  while (true) {
    for (std::size_t d = 0; d < n; ++d) {
      const double t = per_dim > 1 ? static_cast<double>(idx[d]) / static_cast<double>(per_dim - 1) : 0.5;
      x[static_cast<Eigen::Index>(d)] = box[d].lo + t * box[d].width();
    }
    if (visit(x)) return true;
    std::size_t d = 0;
    while (d < n && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == n) return false;
  }
}

struct Candidate {
  double margin;
  Vector x;
};

// Collects misclassified points (at most `keep`) found by the attack stages.
struct AttackRun {
  std::vector<Vector> hits;
  OracleEffort effort;
};

AttackRun RunAttack(const QuerySpec& q, const AttackBudget& budget, std::size_t keep) {
  const EENetwork& net = *q.net;
  const BoxDomain box = q.box();
  AttackRun run;
  run.effort.grid_resolution = budget.grid_points_per_dim;
  std::vector<Candidate> best;  // lowest margins, for refinement
  constexpr std::size_t kSeeds = 4;

  auto consider = [&](const Vector& x) {
    ++run.effort.samples;
    const double m = winner_margin(net, x, q.winner);
    if (m < 0.0 || Misclassified(net, x, q.winner)) {
      run.hits.push_back(x);
      return run.hits.size() >= keep;
    }
    if (best.size() < kSeeds || m < best.back().margin) {
      if (best.size() == kSeeds) best.pop_back();
      best.push_back({m, x});
      std::sort(best.begin(), best.end(),
                [](const Candidate& a, const Candidate& b) { return a.margin < b.margin; });
    }
    return false;
  };

  if (budget.grid_points_per_dim > 0 &&
      ForEachGridPoint(box, budget.grid_points_per_dim, consider)) {
    return run;
  }
  std::mt19937_64 rng(budget.seed);
  for (std::size_t s = 0; s < budget.random_samples; ++s) {
    if (consider(SampleBox(box, rng))) return run;
  }

  // Coordinate descent on the winner's margin, step halving on failure.
  const double start_step =
      box.max_width() / static_cast<double>(std::max<std::size_t>(budget.grid_points_per_dim, 2));
  std::size_t steps_left = budget.refinement_steps;
  const std::vector<Candidate> seeds = best;
  for (const Candidate& seed : seeds) {
    Vector x = seed.x;
    double margin = seed.margin;
    double step = start_step;
    while (steps_left > 0 && step > 1e-12) {
      bool improved = false;
      for (std::size_t d = 0; d < box.size() && steps_left > 0; ++d) {
        for (double dir : {-1.0, 1.0}) {
          Vector y = x;
          const auto di = static_cast<Eigen::Index>(d);
          y[di] = std::clamp(y[di] + dir * step, box[d].lo, box[d].hi);
          --steps_left;
          ++run.effort.refinement_iterations;
          if (Misclassified(net, y, q.winner)) {
            run.hits.push_back(y);
            if (run.hits.size() >= keep) return run;
          }
          const double m = winner_margin(net, y, q.winner);
          if (m < margin) {
            margin = m;
            x = y;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }
  return run;
}

// Half-width of the largest box (doubling from `start`, capped by the ball
// size) around `x` whose grid points are all misclassified.
double MisclassifiedRadius(const QuerySpec& q, const Vector& x, double start) {
  const BoxDomain ballbox = q.box();
  double good = 0.0;
  for (double r = start; r <= 2.0 * q.eps + start; r *= 2.0) {
    std::vector<Interval> dims;
    for (std::size_t d = 0; d < ballbox.size(); ++d) {
      const double c = x[static_cast<Eigen::Index>(d)];
      dims.push_back({std::max(c - r, ballbox[d].lo), std::min(c + r, ballbox[d].hi)});
    }
    const BoxDomain local(std::move(dims));
    const bool broken = ForEachGridPoint(local, 5, [&](const Vector& y) {
      return !Misclassified(*q.net, y, q.winner);
    });
    if (broken) break;
    good = r;
  }
  return good;
}

enum class Proof { kProven, kOpen };

// Interval proof that every point of the box is classified as `winner`:
// walk the exits in order; at each, no runner-up may clear the gate, and if
// the winner always clears it we are done; otherwise fall through.
Proof ProveCorrect(const EENetwork& net, const LayerBounds& bounds, std::size_t winner) {
  for (std::size_t e = 0; e < net.num_exits(); ++e) {
    const IntervalVector& logits = bounds.exit_logits[e];
    const double t = net.exits()[e].threshold;
    for (std::size_t i = 0; i < net.num_classes(); ++i) {
      if (i == winner) continue;
      if (softmax_prob_bounds(logits, i).hi > t - kDecisionSlack) return Proof::kOpen;
    }
    if (softmax_prob_bounds(logits, winner).lo > t + kDecisionSlack) return Proof::kProven;
  }
  const IntervalVector& logits = bounds.post.back();
  const auto w = static_cast<Eigen::Index>(winner);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (i != w && logits.hi[i] - logits.lo[w] > -kDecisionSlack) return Proof::kOpen;
  }
  return Proof::kProven;
}

struct Certification {
  OracleStatus status = OracleStatus::kUndecided;
  std::optional<Vector> witness;
  double min_proof_width = std::numeric_limits<double>::infinity();
  std::size_t boxes = 0;
};

Certification Certify(const QuerySpec& q, const ReferenceConfig& cfg) {
  Certification out;
  std::vector<BoxDomain> stack{q.box()};
  while (!stack.empty()) {
    if (out.boxes >= cfg.max_boxes) return out;
    BoxDomain box = std::move(stack.back());
    stack.pop_back();
    ++out.boxes;
    const LayerBounds bounds = propagate(*q.net, box);
    if (ProveCorrect(*q.net, bounds, q.winner) == Proof::kProven) {
      // The root needs no splitting at all, whatever its width.
      if (out.boxes > 1) out.min_proof_width = std::min(out.min_proof_width, box.max_width());
      continue;
    }
    const Vector c = box.center();
    if (Misclassified(*q.net, c, q.winner)) {
      out.status = OracleStatus::kUnsafe;
      out.witness = c;
      return out;
    }
    if (box.max_width() <= cfg.delta) return out;
    if (cfg.stop_when_indecisive && box.max_width() <= cfg.decisive_margin) return out;
    auto [lower, upper] = box.bisect(box.widest_dim());
    stack.push_back(std::move(upper));
    stack.push_back(std::move(lower));
  }
  out.status = OracleStatus::kSafe;
  return out;
}

}  // namespace

const char* to_string(OracleStatus status) {
  switch (status) {
    case OracleStatus::kSafe: return "SAFE";
    case OracleStatus::kUnsafe: return "UNSAFE";
    case OracleStatus::kUndecided: return "UNDECIDED";
  }
  return "?";
}

double winner_margin(const EENetwork& net, const Vector& x, std::size_t winner) {
  const InferenceResult r = infer(net, x);
  const auto w = static_cast<Eigen::Index>(winner);
  if (!r.exit_index.is_last()) {
    const double t = net.exit(r.exit_index).threshold;
    return r.predicted_class == winner ? r.probs[w] - t : -(r.probs.maxCoeff() - t);
  }
  double other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < r.logits.size(); ++i) {
    if (i != w) other = std::max(other, r.logits[i]);
  }
  return r.logits[w] - other;
}

std::optional<Vector> attack_search(const QuerySpec& q, const AttackBudget& budget) {
  AttackRun run = RunAttack(q, budget, 1);
  if (run.hits.empty()) return std::nullopt;
  return run.hits.front();
}

OracleVerdict decide_reference(const QuerySpec& q, const ReferenceConfig& cfg) {
  OracleVerdict out;
  AttackRun run = RunAttack(q, cfg.attack, 16);
  out.effort = run.effort;
  if (!run.hits.empty()) {
    out.status = OracleStatus::kUnsafe;
    out.witness = run.hits.front();
    const double probe = cfg.decisive_margin / 4.0;
    for (const Vector& hit : run.hits) {
      const double r = MisclassifiedRadius(q, hit, probe);
      if (r > out.margin) {
        out.margin = r;
        out.witness = hit;
      }
      if (out.margin >= cfg.decisive_margin) break;
    }
    out.decisive = out.margin >= cfg.decisive_margin;
    return out;
  }
  if (q.net->input_dim() > cfg.max_input_dim) {
    throw ValidationError("input_dim", "certification path supports at most " +
                                           std::to_string(cfg.max_input_dim) + " inputs");
  }
  Certification cert = Certify(q, cfg);
  out.effort.certification_boxes = cert.boxes;
  out.status = cert.status;
  if (cert.status == OracleStatus::kUnsafe) {
    out.witness = cert.witness;
    out.margin = MisclassifiedRadius(q, *cert.witness, cfg.decisive_margin / 4.0);
    out.decisive = out.margin >= cfg.decisive_margin;
  } else if (cert.status == OracleStatus::kSafe) {
    out.margin = cert.min_proof_width;
    out.decisive = out.margin > cfg.decisive_margin;
  }
  return out;
}

double trace_stability_estimate(const QuerySpec& q, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ValidationError("samples", "must be >= 1");
  const BoxDomain box = q.box();
  const Trace reference = trace(*q.net, q.center);
  std::mt19937_64 rng(seed);
  std::size_t same = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    if (trace(*q.net, SampleBox(box, rng)) == reference) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(samples);
}

}  // namespace eev
