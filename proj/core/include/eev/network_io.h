#pragma once

#include <filesystem>
#include <string>

#include "eev/network.h"

namespace eev {

// Interchange format:
//   { "input_dim": int, "num_classes": int,
//     "layers": [ {"weights": [[...]], "bias": [...], "relu": bool} ],
//     "exits":  [ {"after_layer": int, "weights": [[...]], "bias": [...],
//                  "threshold": float} ] }
// Weights are row-major (one array per output row). Reals are written with
// 17 significant digits so that a save/load round trip is bit-exact.

EENetwork load_network(const std::filesystem::path& path);
EENetwork parse_network(const std::string& json_text);

std::string serialize_network(const EENetwork& net);
void save_network(const EENetwork& net, const std::filesystem::path& path);

// Shortest-form-independent decimal rendering with 17 significant digits.
std::string format_double17(double v);

}  // namespace eev
