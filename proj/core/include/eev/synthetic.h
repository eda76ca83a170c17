#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eev/network.h"

namespace eev {

// Shape of a randomly generated network. `hidden_widths` lists the hidden
// layer widths; the output layer (width num_classes) is appended.
struct SyntheticSpec {
  std::size_t input_dim = 2;
  std::size_t num_classes = 2;
  std::vector<std::size_t> hidden_widths = {8};
  std::vector<std::size_t> exit_after;  // backbone layer indices, strictly ascending
  std::vector<double> thresholds;       // one per exit, or a single shared value
  // Weights and biases are drawn uniformly from [-s, s] with
  // s = weight_scale / sqrt(fan_in). weight_scale = 1 gives the plain
  // 1/sqrt(fan_in) default.
  double weight_scale = 1.0;
};

// Deterministic in (seed, spec): std::mt19937_64 feeding a hand-rolled
// uniform mapping, so the result does not depend on the standard library's
// distribution implementation.
EENetwork gen_synthetic(std::uint64_t seed, const SyntheticSpec& spec);

}  // namespace eev
