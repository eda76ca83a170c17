#include "eev/interval.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eev/error.h"

namespace eev {
namespace {

// gamma_k = k u / (1 - k u), the classic bound on the relative error of a
// k-term floating-point dot product.
double Gamma(Eigen::Index k) {
  const double ku = static_cast<double>(k) * std::numeric_limits<double>::epsilon() / 2;
  return ku / (1.0 - ku);
}

Vector ErrOrZero(const Vector& err, Eigen::Index n) { return err.size() ? err : Vector::Zero(n); }

IntervalVector AffineBounds(const Matrix& w, const Vector& b, const IntervalVector& in) {
  const Matrix pos = w.cwiseMax(0.0);
  const Matrix neg = -w.cwiseMin(0.0);
  IntervalVector out;
  out.lo = pos * in.lo - neg * in.hi + b;
  out.hi = pos * in.hi - neg * in.lo + b;
  if (!out.lo.allFinite() || !out.hi.allFinite()) {
    throw InternalError("interval bounds overflowed");
  }
  // Rounding committed here plus the input's error carried through |W|.
  // The trailing factor absorbs the rounding of this estimate itself.
  const double g = Gamma(2 * w.cols() + 2);
  const Vector e_lo = ErrOrZero(in.err_lo, in.size()), e_hi = ErrOrZero(in.err_hi, in.size());
  const Vector a_lo = in.lo.cwiseAbs(), a_hi = in.hi.cwiseAbs(), a_b = b.cwiseAbs();
  constexpr double kPad = 1.0 + 1e-12;
  out.err_lo = ((pos * e_lo + neg * e_hi) + g * (pos * a_lo + neg * a_hi + a_b)) * kPad;
  out.err_hi = ((pos * e_hi + neg * e_lo) + g * (pos * a_hi + neg * a_lo + a_b)) * kPad;
  return out;
}

// max(0, .) is 1-Lipschitz, so errors pass through; an endpoint that is
// provably non-positive becomes an exact zero.
void ClampRelu(IntervalVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v.lo[i] + v.err_lo[i] <= 0.0) {
      v.lo[i] = 0.0;
      v.err_lo[i] = 0.0;
    } else if (v.lo[i] < 0.0) {
      v.lo[i] = 0.0;
    }
    if (v.hi[i] + v.err_hi[i] <= 0.0) {
      v.hi[i] = 0.0;
      v.err_hi[i] = 0.0;
    } else if (v.hi[i] < 0.0) {
      v.hi[i] = 0.0;
    }
  }
}

// sum_j exp(v_j - shift) over j != skip.
double ShiftedExpSum(const Vector& v, std::size_t skip, double shift) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (static_cast<std::size_t>(j) != skip) total += std::exp(v[j] - shift);
  }
  return total;
}

double MaxExcept(const Vector& v, std::size_t skip) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (static_cast<std::size_t>(j) != skip) best = std::max(best, v[j]);
  }
  return best;
}

}  // namespace

BoxDomain::BoxDomain(std::vector<Interval> dims) : dims_(std::move(dims)) {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Interval& d = dims_[i];
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo > d.hi) {
      throw ValidationError("box[" + std::to_string(i) + "]", "empty or non-finite interval");
    }
  }
}

Vector BoxDomain::lower() const {
  Vector v(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) v[static_cast<Eigen::Index>(i)] = dims_[i].lo;
  return v;
}

Vector BoxDomain::upper() const {
  Vector v(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) v[static_cast<Eigen::Index>(i)] = dims_[i].hi;
  return v;
}

Vector BoxDomain::center() const {
  Vector v(static_cast<Eigen::Index>(dims_.size()));
  for (std::size_t i = 0; i < dims_.size(); ++i) v[static_cast<Eigen::Index>(i)] = dims_[i].mid();
  return v;
}

bool BoxDomain::contains(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!dims_[i].contains(x[static_cast<Eigen::Index>(i)])) return false;
  }
  return true;
}

std::size_t BoxDomain::widest_dim() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < dims_.size(); ++i) {
    if (dims_[i].width() > dims_[best].width()) best = i;
  }
  return best;
}

double BoxDomain::max_width() const { return dims_.empty() ? 0.0 : dims_[widest_dim()].width(); }

std::pair<BoxDomain, BoxDomain> BoxDomain::bisect(std::size_t dim) const {
  std::vector<Interval> left = dims_;
  std::vector<Interval> right = dims_;
  const double mid = dims_[dim].mid();
  left[dim].hi = mid;
  right[dim].lo = mid;
  return {BoxDomain(std::move(left)), BoxDomain(std::move(right))};
}

BoxDomain ball(const Vector& x, double eps, std::optional<ClipRange> clip) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ValidationError("eps", "must be >= 0");
  if (!x.allFinite()) throw ValidationError("x", "non-finite input");
  std::vector<Interval> dims;
  dims.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Interval d{x[i] - eps, x[i] + eps};
    if (clip) {
      d.lo = std::max(d.lo, clip->lo);
      d.hi = std::min(d.hi, clip->hi);
      if (d.lo > d.hi) {
        throw ValidationError("x[" + std::to_string(i) + "]", "ball is empty after clipping");
      }
    }
    dims.push_back(d);
  }
  return BoxDomain(std::move(dims));
}

double IntervalVector::max_err() const {
  double e = 0.0;
  if (err_lo.size()) e = std::max(e, err_lo.maxCoeff());
  if (err_hi.size()) e = std::max(e, err_hi.maxCoeff());
  return e;
}

LayerBounds propagate(const EENetwork& net, const BoxDomain& box) {
  if (box.size() != net.input_dim()) {
    throw ValidationError("box", "dimension does not match network input");
  }
  LayerBounds out;
  const auto& layers = net.backbone();
  out.pre.reserve(layers.size());
  out.post.reserve(layers.size());
  out.exit_logits.reserve(net.num_exits());

  IntervalVector act{box.lower(), box.upper(), {}, {}};
  std::size_t next_exit = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    IntervalVector pre = AffineBounds(layers[l].weights, layers[l].bias, act);
    act = pre;
    if (layers[l].relu) ClampRelu(act);
    out.pre.push_back(std::move(pre));
    out.post.push_back(act);
    if (next_exit < net.num_exits() && net.exits()[next_exit].after_layer == l) {
      const ExitHead& head = net.exits()[next_exit];
      out.exit_logits.push_back(AffineBounds(head.weights, head.bias, act));
      ++next_exit;
    }
  }
  return out;
}

Interval softmax_prob_bounds(const IntervalVector& logits, std::size_t cls) {
  const auto i = static_cast<Eigen::Index>(cls);
  // Lower bound: own logit low, competitors high. Shift by the largest
  // exponent in play so nothing overflows.
  const double lo_shift = std::max(logits.lo[i], MaxExcept(logits.hi, cls));
  const double lo_own = std::exp(logits.lo[i] - lo_shift);
  const double lo = lo_own / (lo_own + ShiftedExpSum(logits.hi, cls, lo_shift));

  const double hi_shift = std::max(logits.hi[i], MaxExcept(logits.lo, cls));
  const double hi_own = std::exp(logits.hi[i] - hi_shift);
  const double hi = hi_own / (hi_own + ShiftedExpSum(logits.lo, cls, hi_shift));
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

}  // namespace eev
