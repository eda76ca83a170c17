#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eev {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Identifies an output point of the network: one of the early exits
// (0-based ordinal in after_layer order) or the final classifier.
class ExitId {
 public:
  static constexpr ExitId Early(std::size_t ordinal) { return ExitId(ordinal); }
  static constexpr ExitId Last() { return ExitId(kLastValue); }

  constexpr bool is_last() const { return value_ == kLastValue; }
  // Only meaningful for early exits.
  constexpr std::size_t ordinal() const { return value_; }

  // "exit1", "exit2", ... for early exits (1-based), "last" otherwise.
  std::string label() const;
  // Inverse of label(). Throws ValidationError on unknown labels.
  static ExitId FromLabel(const std::string& label);

  constexpr auto operator<=>(const ExitId&) const = default;

 private:
  static constexpr std::size_t kLastValue = std::numeric_limits<std::size_t>::max();
  constexpr explicit ExitId(std::size_t v) : value_(v) {}
  std::size_t value_;
};

struct AffineLayer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  bool relu = true;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct ExitHead {
  std::size_t after_layer = 0;  // backbone layer whose post-activation feeds the head
  Matrix weights;               // num_classes x width(after_layer)
  Vector bias;
  double threshold = 0.9;
};

// A feed-forward ReLU network with early-exit heads. Immutable once built;
// the constructor enforces every structural invariant.
class EENetwork {
 public:
  EENetwork(std::size_t input_dim, std::size_t num_classes,
            std::vector<AffineLayer> backbone, std::vector<ExitHead> exits);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<AffineLayer>& backbone() const { return backbone_; }
  const std::vector<ExitHead>& exits() const { return exits_; }
  std::size_t num_exits() const { return exits_.size(); }
  std::size_t last_layer() const { return backbone_.size() - 1; }

  const ExitHead& exit(ExitId id) const;
  // Early exits in order followed by Last().
  std::vector<ExitId> exit_ids() const;
  bool valid(ExitId id) const { return id.is_last() || id.ordinal() < exits_.size(); }
  // Backbone layer that produces the output for `id`.
  std::size_t layer_of(ExitId id) const;

  // Same weights, every exit threshold replaced by `threshold`.
  EENetwork with_uniform_threshold(double threshold) const;
  // Same backbone, no exits.
  EENetwork without_exits() const;

  // Largest layer width (reporting only).
  std::size_t max_width() const;
  std::size_t total_neurons() const;

  bool operator==(const EENetwork& other) const;

 private:
  std::size_t input_dim_;
  std::size_t num_classes_;
  std::vector<AffineLayer> backbone_;
  std::vector<ExitHead> exits_;
};

struct InferenceResult {
  ExitId exit_index = ExitId::Last();
  Vector logits;
  Vector probs;
  std::size_t predicted_class = 0;
};

struct Trace {
  std::vector<std::size_t> layers;  // always a backbone prefix 0..k
  ExitId exit_index = ExitId::Last();

  bool operator==(const Trace&) const = default;
};

// Numerically stable SoftMax (max-shifted).
Vector softmax(const Vector& logits);

// argmax with ties resolved to the lowest index.
std::size_t argmax(const Vector& v);

// Early-exit inference: the first exit whose maximum SoftMax probability
// strictly exceeds its threshold produces the output; otherwise the last
// layer does.
InferenceResult infer(const EENetwork& net, const Vector& x);

// Logits at `at`, ignoring all gating. No SoftMax is applied.
Vector forward_logits(const EENetwork& net, const Vector& x, ExitId at);

// All exit logits in one pass, indexed like exit_ids(). Gating ignored.
std::vector<Vector> all_exit_logits(const EENetwork& net, const Vector& x);

Trace trace(const EENetwork& net, const Vector& x);

}  // namespace eev
