#pragma once

#include "tomsc/nn/parameter.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace tomsc::nn {

/// Named parameter snapshot. Values are written as hex-float strings so a
/// write/read round trip is bit-exact.
struct Checkpoint {
  std::map<std::string, Mat> params;
  std::map<std::string, std::string> meta;

  static Checkpoint capture(const ParameterList& list);
  /// Copies stored values into `list` by name; every parameter must be present
  /// with a matching shape.
  void restore(const ParameterList& list) const;

  std::string to_json() const;
  static Checkpoint from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

std::string hexfloat(double v);
double parse_hexfloat(const std::string& s);

}  // namespace tomsc::nn
