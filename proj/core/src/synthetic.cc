#include "eev/synthetic.h"

#include <cmath>
#include <random>

#include "eev/error.h"

namespace eev {
namespace {

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [-s, s], built from the top 53 bits of the engine output.
  double Symmetric(double s) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * s;
  }

  Matrix MatrixOf(Eigen::Index rows, Eigen::Index cols, double s) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = Symmetric(s);
    return m;
  }

  Vector VectorOf(Eigen::Index n, double s) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = Symmetric(s);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

EENetwork gen_synthetic(std::uint64_t seed, const SyntheticSpec& spec) {
  if (!(spec.weight_scale > 0.0) || !std::isfinite(spec.weight_scale)) {
    throw ValidationError("weight_scale", "must be positive and finite");
  }
  if (!spec.thresholds.empty() && spec.thresholds.size() != 1 &&
      spec.thresholds.size() != spec.exit_after.size()) {
    throw ValidationError("thresholds", "need one threshold per exit or a single shared one");
  }
  if (spec.thresholds.empty() && !spec.exit_after.empty()) {
    throw ValidationError("thresholds", "exits given without thresholds");
  }

  UniformSource rng(seed);
  std::vector<AffineLayer> backbone;
  std::size_t fan_in = spec.input_dim;
  std::vector<std::size_t> widths = spec.hidden_widths;
  widths.push_back(spec.num_classes);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    if (widths[l] == 0 || fan_in == 0) {
      throw ValidationError("hidden_widths[" + std::to_string(l) + "]", "width must be >= 1");
    }
    const double s = spec.weight_scale / std::sqrt(static_cast<double>(fan_in));
    AffineLayer layer;
    layer.weights = rng.MatrixOf(static_cast<Eigen::Index>(widths[l]),
                                 static_cast<Eigen::Index>(fan_in), s);
    layer.bias = rng.VectorOf(static_cast<Eigen::Index>(widths[l]), s);
    layer.relu = l + 1 < widths.size();
    backbone.push_back(std::move(layer));
    fan_in = widths[l];
  }

  std::vector<ExitHead> exits;
  for (std::size_t e = 0; e < spec.exit_after.size(); ++e) {
    const std::size_t after = spec.exit_after[e];
    if (after + 1 >= backbone.size()) {
      throw ValidationError("exit_after[" + std::to_string(e) + "]",
                            "exit must precede last layer");
    }
    const auto feed = backbone[after].out_dim();
    const double s = spec.weight_scale / std::sqrt(static_cast<double>(feed));
    ExitHead head;
    head.after_layer = after;
    head.weights = rng.MatrixOf(static_cast<Eigen::Index>(spec.num_classes), feed, s);
    head.bias = rng.VectorOf(static_cast<Eigen::Index>(spec.num_classes), s);
    head.threshold = spec.thresholds.size() == 1 ? spec.thresholds[0] : spec.thresholds[e];
    exits.push_back(std::move(head));
  }
  return EENetwork(spec.input_dim, spec.num_classes, std::move(backbone), std::move(exits));
}

}  // namespace eev
