#pragma once

#include <optional>
#include <vector>

#include "eev/network.h"

namespace eev {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool operator==(const Interval&) const = default;
};

// Element-wise interval vector stored as two dense vectors.
//
// err_lo / err_hi bound the floating-point rounding in each endpoint: the
// exact-arithmetic bound lies within err of the stored one. Empty means
// exact (e.g. the input box).
struct IntervalVector {
  Vector lo;
  Vector hi;
  Vector err_lo;
  Vector err_hi;

  Eigen::Index size() const { return lo.size(); }
  Interval operator[](Eigen::Index i) const { return {lo[i], hi[i]}; }
  double lo_err(Eigen::Index i) const { return err_lo.size() ? err_lo[i] : 0.0; }
  double hi_err(Eigen::Index i) const { return err_hi.size() ? err_hi[i] : 0.0; }
  double max_err() const;
};

struct ClipRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Axis-aligned input region. Every interval is non-empty.
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<Interval> dims);

  const std::vector<Interval>& dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }

  Vector lower() const;
  Vector upper() const;
  Vector center() const;
  bool contains(const Vector& x) const;
  // Index of the widest dimension; ties resolved to the lowest index.
  std::size_t widest_dim() const;
  double max_width() const;
  // Split at the midpoint of `dim` into (lower half, upper half).
  std::pair<BoxDomain, BoxDomain> bisect(std::size_t dim) const;

 private:
  std::vector<Interval> dims_;
};

// The l-infinity ball of radius eps around x, intersected with `clip`.
BoxDomain ball(const Vector& x, double eps, std::optional<ClipRange> clip = std::nullopt);

// Interval enclosures for every neuron and exit over a box.
struct LayerBounds {
  std::vector<IntervalVector> pre;   // before activation, per backbone layer
  std::vector<IntervalVector> post;  // after activation (equals pre on the last layer)
  std::vector<IntervalVector> exit_logits;  // per early exit

  const IntervalVector& logits(ExitId id) const {
    return id.is_last() ? post.back() : exit_logits[id.ordinal()];
  }
};

// Interval affine transform followed by the ReLU clamp, layer by layer.
LayerBounds propagate(const EENetwork& net, const BoxDomain& box);

// Sound enclosure of SoftMax_i over the given logit box:
//   lo = e^{lo_i} / (e^{lo_i} + sum_{j!=i} e^{hi_j})
//   hi = e^{hi_i} / (e^{hi_i} + sum_{j!=i} e^{lo_j})
Interval softmax_prob_bounds(const IntervalVector& logits, std::size_t cls);

}  // namespace eev
