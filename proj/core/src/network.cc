#include "eev/network.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "eev/error.h"

namespace eev {
namespace {

std::string Path(const std::string& base, std::size_t i, const std::string& field) {
  return base + "[" + std::to_string(i) + "]" + (field.empty() ? "" : "." + field);
}

void CheckFinite(const Matrix& m, const std::string& path) {
  if (!m.allFinite()) throw ValidationError(path, "non-finite entry");
}

void CheckFinite(const Vector& v, const std::string& path) {
  if (!v.allFinite()) throw ValidationError(path, "non-finite entry");
}

void CheckInput(const EENetwork& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw ValidationError("x", "expected " + std::to_string(net.input_dim()) +
                                   " inputs, got " + std::to_string(x.size()));
  }
  if (!x.allFinite()) throw ValidationError("x", "non-finite input");
}

Vector ApplyLayer(const AffineLayer& layer, const Vector& in) {
  Vector out = layer.weights * in + layer.bias;
  if (layer.relu) out = out.cwiseMax(0.0);
  return out;
}

}  // namespace

std::string ExitId::label() const {
  return is_last() ? std::string("last") : "exit" + std::to_string(value_ + 1);
}

ExitId ExitId::FromLabel(const std::string& label) {
  if (label == "last") return Last();
  if (label.size() > 4 && label.compare(0, 4, "exit") == 0) {
    std::size_t consumed = 0;
    unsigned long n = 0;
    try {
      n = std::stoul(label.substr(4), &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == label.size() - 4 && n >= 1) return Early(n - 1);
  }
  throw ValidationError("exit", "unknown exit label '" + label + "'");
}

EENetwork::EENetwork(std::size_t input_dim, std::size_t num_classes,
                     std::vector<AffineLayer> backbone, std::vector<ExitHead> exits)
    : input_dim_(input_dim),
      num_classes_(num_classes),
      backbone_(std::move(backbone)),
      exits_(std::move(exits)) {
  if (input_dim_ < 1) throw ValidationError("input_dim", "must be >= 1");
  if (num_classes_ < 2) throw ValidationError("num_classes", "must be >= 2");
  if (backbone_.empty()) throw ValidationError("layers", "at least one layer required");

  std::size_t width = input_dim_;
  for (std::size_t l = 0; l < backbone_.size(); ++l) {
    const AffineLayer& layer = backbone_[l];
    if (layer.out_dim() < 1 || layer.in_dim() < 1) {
      throw ValidationError(Path("layers", l, "weights"), "empty matrix");
    }
    if (static_cast<std::size_t>(layer.in_dim()) != width) {
      throw ValidationError(Path("layers", l, "weights"),
                            "expected " + std::to_string(width) + " columns, got " +
                                std::to_string(layer.in_dim()));
    }
    if (layer.bias.size() != layer.out_dim()) {
      throw ValidationError(Path("layers", l, "bias"), "length must equal weight rows");
    }
    CheckFinite(layer.weights, Path("layers", l, "weights"));
    CheckFinite(layer.bias, Path("layers", l, "bias"));
    const bool is_last = l + 1 == backbone_.size();
    if (is_last && layer.relu) {
      throw ValidationError(Path("layers", l, "relu"), "last layer must not apply ReLU");
    }
    if (!is_last && !layer.relu) {
      throw ValidationError(Path("layers", l, "relu"), "hidden layers must apply ReLU");
    }
    width = static_cast<std::size_t>(layer.out_dim());
  }
  if (width != num_classes_) {
    throw ValidationError(Path("layers", backbone_.size() - 1, "weights"),
                          "last layer must have num_classes rows");
  }

  for (std::size_t e = 0; e < exits_.size(); ++e) {
    const ExitHead& head = exits_[e];
    if (head.after_layer >= last_layer()) {
      throw ValidationError(Path("exits", e, "after_layer"), "exit must precede last layer");
    }
    if (e > 0 && head.after_layer <= exits_[e - 1].after_layer) {
      throw ValidationError(Path("exits", e, "after_layer"),
                            "exits must be sorted strictly ascending by after_layer");
    }
    if (!std::isfinite(head.threshold) || head.threshold <= 0.5) {
      throw ValidationError(Path("exits", e, "threshold"), "threshold must exceed 0.5");
    }
    if (head.threshold > 1.0) {
      throw ValidationError(Path("exits", e, "threshold"), "threshold must be at most 1");
    }
    const auto feed = backbone_[head.after_layer].out_dim();
    if (head.weights.rows() != static_cast<Eigen::Index>(num_classes_) ||
        head.weights.cols() != feed) {
      throw ValidationError(Path("exits", e, "weights"),
                            "expected " + std::to_string(num_classes_) + "x" +
                                std::to_string(feed) + " matrix");
    }
    if (head.bias.size() != static_cast<Eigen::Index>(num_classes_)) {
      throw ValidationError(Path("exits", e, "bias"), "length must equal num_classes");
    }
    CheckFinite(head.weights, Path("exits", e, "weights"));
    CheckFinite(head.bias, Path("exits", e, "bias"));
  }
}

const ExitHead& EENetwork::exit(ExitId id) const {
  if (id.is_last() || id.ordinal() >= exits_.size()) {
    throw ValidationError("exit", "invalid exit identifier " + id.label());
  }
  return exits_[id.ordinal()];
}

std::vector<ExitId> EENetwork::exit_ids() const {
  std::vector<ExitId> ids;
  ids.reserve(exits_.size() + 1);
  for (std::size_t e = 0; e < exits_.size(); ++e) ids.push_back(ExitId::Early(e));
  ids.push_back(ExitId::Last());
  return ids;
}

std::size_t EENetwork::layer_of(ExitId id) const {
  return id.is_last() ? last_layer() : exit(id).after_layer;
}

EENetwork EENetwork::with_uniform_threshold(double threshold) const {
  std::vector<ExitHead> exits = exits_;
  for (auto& head : exits) head.threshold = threshold;
  return EENetwork(input_dim_, num_classes_, backbone_, std::move(exits));
}

EENetwork EENetwork::without_exits() const {
  return EENetwork(input_dim_, num_classes_, backbone_, {});
}

std::size_t EENetwork::max_width() const {
  std::size_t w = input_dim_;
  for (const auto& layer : backbone_) w = std::max<std::size_t>(w, layer.out_dim());
  return w;
}

std::size_t EENetwork::total_neurons() const {
  std::size_t total = 0;
  for (const auto& layer : backbone_) total += layer.out_dim();
  return total;
}

bool EENetwork::operator==(const EENetwork& other) const {
  if (input_dim_ != other.input_dim_ || num_classes_ != other.num_classes_ ||
      backbone_.size() != other.backbone_.size() || exits_.size() != other.exits_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < backbone_.size(); ++l) {
    const auto& a = backbone_[l];
    const auto& b = other.backbone_[l];
    if (a.relu != b.relu || a.weights.rows() != b.weights.rows() ||
        a.weights.cols() != b.weights.cols() || a.weights != b.weights || a.bias != b.bias) {
      return false;
    }
  }
  for (std::size_t e = 0; e < exits_.size(); ++e) {
    const auto& a = exits_[e];
    const auto& b = other.exits_[e];
    if (a.after_layer != b.after_layer || a.threshold != b.threshold ||
        a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
        a.weights != b.weights || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

Vector softmax(const Vector& logits) {
  const double shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp().matrix();
  return p / p.sum();
}

std::size_t argmax(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

InferenceResult infer(const EENetwork& net, const Vector& x) {
  CheckInput(net, x);
  const auto& layers = net.backbone();
  const auto& exits = net.exits();
  std::size_t next_exit = 0;
  Vector act = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    act = ApplyLayer(layers[l], act);
    if (next_exit < exits.size() && exits[next_exit].after_layer == l) {
      const ExitHead& head = exits[next_exit];
      Vector logits = head.weights * act + head.bias;
      Vector probs = softmax(logits);
      const std::size_t top = argmax(probs);
      if (probs[top] > head.threshold) {
        // T > 0.5 and the probabilities sum to one, so `top` is the only candidate.
        return {ExitId::Early(next_exit), std::move(logits), std::move(probs), top};
      }
      ++next_exit;
    }
  }
  Vector probs = softmax(act);
  const std::size_t top = argmax(act);
  return {ExitId::Last(), std::move(act), std::move(probs), top};
}

Vector forward_logits(const EENetwork& net, const Vector& x, ExitId at) {
  CheckInput(net, x);
  if (!net.valid(at)) throw ValidationError("at", "invalid exit identifier " + at.label());
  const std::size_t stop = net.layer_of(at);
  Vector act = x;
  for (std::size_t l = 0; l <= stop; ++l) act = ApplyLayer(net.backbone()[l], act);
  if (at.is_last()) return act;
  const ExitHead& head = net.exit(at);
  return head.weights * act + head.bias;
}

std::vector<Vector> all_exit_logits(const EENetwork& net, const Vector& x) {
  CheckInput(net, x);
  std::vector<Vector> out;
  out.reserve(net.num_exits() + 1);
  const auto& exits = net.exits();
  std::size_t next_exit = 0;
  Vector act = x;
  for (std::size_t l = 0; l < net.backbone().size(); ++l) {
    act = ApplyLayer(net.backbone()[l], act);
    if (next_exit < exits.size() && exits[next_exit].after_layer == l) {
      out.push_back(exits[next_exit].weights * act + exits[next_exit].bias);
      ++next_exit;
    }
  }
  out.push_back(std::move(act));
  return out;
}

Trace trace(const EENetwork& net, const Vector& x) {
  const InferenceResult r = infer(net, x);
  Trace t;
  t.exit_index = r.exit_index;
  const std::size_t stop = net.layer_of(r.exit_index);
  for (std::size_t l = 0; l <= stop; ++l) t.layers.push_back(l);
  return t;
}

}  // namespace eev
