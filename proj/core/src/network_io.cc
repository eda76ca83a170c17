#include "eev/network_io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "eev/error.h"
#include "json.hpp"

namespace eev {
namespace {

using nlohmann::json;

const json& Require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + key, "missing field");
  return *it;
}

double ReadReal(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  return v.get<double>();
}

std::size_t ReadCount(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

Vector ReadVector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = ReadReal(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix ReadMatrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ValidationError(path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array()) throw ValidationError(path + "[0]", "expected an array");
  const std::size_t cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const Vector row = ReadVector(v[r], row_path);
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw ValidationError(row_path, "ragged matrix row");
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

void WriteVector(std::ostream& os, const Vector& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << format_double17(v[i]);
  }
  os << ']';
}

void WriteMatrix(std::ostream& os, const Matrix& m, const char* indent) {
  os << "[\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << indent << "  ";
    WriteVector(os, m.row(r).transpose());
    os << (r + 1 < m.rows() ? ",\n" : "\n");
  }
  os << indent << ']';
}

}  // namespace

std::string format_double17(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("failed to format double");
  std::string s(buf, end);
  // Keep the value recognisable as a JSON real.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

EENetwork parse_network(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("", "top level must be an object");

  const std::size_t input_dim = ReadCount(Require(doc, "input_dim", ""), "input_dim");
  const std::size_t num_classes = ReadCount(Require(doc, "num_classes", ""), "num_classes");

  const json& layers = Require(doc, "layers", "");
  if (!layers.is_array()) throw ValidationError("layers", "expected an array");
  std::vector<AffineLayer> backbone;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "layers[" + std::to_string(l) + "].";
    const json& layer = layers[l];
    if (!layer.is_object()) throw ValidationError(p, "expected an object");
    AffineLayer out;
    out.weights = ReadMatrix(Require(layer, "weights", p), p + "weights");
    out.bias = ReadVector(Require(layer, "bias", p), p + "bias");
    const json& relu = Require(layer, "relu", p);
    if (!relu.is_boolean()) throw ValidationError(p + "relu", "expected a boolean");
    out.relu = relu.get<bool>();
    backbone.push_back(std::move(out));
  }

  std::vector<ExitHead> heads;
  if (auto it = doc.find("exits"); it != doc.end()) {
    if (!it->is_array()) throw ValidationError("exits", "expected an array");
    for (std::size_t e = 0; e < it->size(); ++e) {
      const std::string p = "exits[" + std::to_string(e) + "].";
      const json& head = (*it)[e];
      if (!head.is_object()) throw ValidationError(p, "expected an object");
      ExitHead out;
      out.after_layer = ReadCount(Require(head, "after_layer", p), p + "after_layer");
      out.weights = ReadMatrix(Require(head, "weights", p), p + "weights");
      out.bias = ReadVector(Require(head, "bias", p), p + "bias");
      out.threshold = ReadReal(Require(head, "threshold", p), p + "threshold");
      heads.push_back(std::move(out));
    }
  }
  return EENetwork(input_dim, num_classes, std::move(backbone), std::move(heads));
}

EENetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot open network file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string serialize_network(const EENetwork& net) {
  std::ostringstream os;
  os << "{\n  \"input_dim\": " << net.input_dim() << ",\n  \"num_classes\": "
     << net.num_classes() << ",\n  \"layers\": [\n";
  const auto& layers = net.backbone();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    os << "    {\n      \"weights\": ";
    WriteMatrix(os, layers[l].weights, "      ");
    os << ",\n      \"bias\": ";
    WriteVector(os, layers[l].bias);
    os << ",\n      \"relu\": " << (layers[l].relu ? "true" : "false") << "\n    }"
       << (l + 1 < layers.size() ? ",\n" : "\n");
  }
  os << "  ],\n  \"exits\": [";
  const auto& exits = net.exits();
  for (std::size_t e = 0; e < exits.size(); ++e) {
    os << (e ? ",\n" : "\n") << "    {\n      \"after_layer\": " << exits[e].after_layer
       << ",\n      \"weights\": ";
    WriteMatrix(os, exits[e].weights, "      ");
    os << ",\n      \"bias\": ";
    WriteVector(os, exits[e].bias);
    os << ",\n      \"threshold\": " << format_double17(exits[e].threshold) << "\n    }";
  }
  os << (exits.empty() ? "]\n}\n" : "\n  ]\n}\n");
  return os.str();
}

void save_network(const EENetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path.string(), "cannot open file for writing");
  out << serialize_network(net);
  if (!out) throw ValidationError(path.string(), "write failed");
}

}  // namespace eev
