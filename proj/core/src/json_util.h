#pragma once

// Internal helpers shared by the serialising translation units.

#include <optional>

#include "eev/atom.h"
#include "eev/network.h"
#include "json.hpp"

namespace eev::internal {

inline nlohmann::json ToJson(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline nlohmann::json ToJson(const Atom& atom) {
  nlohmann::json j;
  j["kind"] = to_string(atom.kind);
  j["exit"] = atom.exit.label();
  switch (atom.kind) {
    case AtomKind::kProbGt:
    case AtomKind::kProbLt:
      j["class"] = atom.cls;
      j["bound"] = atom.bound;
      break;
    case AtomKind::kNotArgmax:
      j["winner"] = atom.winner;
      break;
    case AtomKind::kArgmaxLosesTo:
      j["winner"] = atom.winner;
      j["class"] = atom.cls;
      break;
  }
  return j;
}

inline nlohmann::json ToJson(const Conjunction& conj) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& atom : conj.atoms) arr.push_back(ToJson(atom));
  return arr;
}

}  // namespace eev::internal
