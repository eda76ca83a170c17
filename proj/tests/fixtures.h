#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "eev/network.h"
#include "eev/synthetic.h"

namespace eev::testing {

inline Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Two inputs, two classes. Layer 0 is identity + ReLU, the last layer is
// identity, and one identity exit head after layer 0 with threshold 0.9.
inline EENetwork FixtureA(double threshold = 0.9) {
  const Matrix id = Matrix::Identity(2, 2);
  const Vector zero = Vector::Zero(2);
  return EENetwork(2, 2, {AffineLayer{id, zero, true}, AffineLayer{id, zero, false}},
                   {ExitHead{0, id, zero, threshold}});
}

inline double Sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Calls f on every point of an (n_per_dim)^d grid spanning the box
// [lo, hi]. Stops early when f returns false.
inline void ForGrid(const Vector& lo, const Vector& hi, std::size_t n_per_dim,
                    const std::function<bool(const Vector&)>& f) {
  const auto d = lo.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Vector x(d);
  while (true) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double t = n_per_dim == 1 ? 0.5 : static_cast<double>(idx[j]) / (n_per_dim - 1);
      x[j] = lo[j] + t * (hi[j] - lo[j]);
    }
    if (!f(x)) return;
    std::size_t j = 0;
    while (j < idx.size() && ++idx[j] == n_per_dim) idx[j++] = 0;
    if (j == idx.size()) return;
  }
}

// A random small network in the acceptance envelope (n <= 3, C <= 4,
// <= 3 exits, <= 64 neurons, T in [0.6, 0.95]).
inline EENetwork RandomSmallNet(std::mt19937_64& rng, bool with_exits = true) {
  std::uniform_int_distribution<std::size_t> dim(1, 3), cls(2, 4), depth(2, 3), width(3, 8);
  std::uniform_real_distribution<double> thr(0.6, 0.95), scale(2.0, 4.0);
  SyntheticSpec spec;
  spec.input_dim = dim(rng);
  spec.num_classes = cls(rng);
  spec.hidden_widths.clear();
  const std::size_t hidden = depth(rng);
  for (std::size_t i = 0; i < hidden; ++i) spec.hidden_widths.push_back(width(rng));
  if (with_exits) {
    std::uniform_int_distribution<std::size_t> nexits(1, std::min<std::size_t>(3, hidden));
    const std::size_t e = nexits(rng);
    for (std::size_t i = 0; i < e; ++i) {
      spec.exit_after.push_back(hidden - e + i);
      spec.thresholds.push_back(thr(rng));
    }
  }
  spec.weight_scale = scale(rng);
  return gen_synthetic(rng(), spec);
}

}  // namespace eev::testing
