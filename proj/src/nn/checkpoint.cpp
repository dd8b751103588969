#include "tomsc/nn/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tomsc::nn {

namespace {
constexpr const char* kFormat = "tomsc-checkpoint";
constexpr int kVersion = 1;
}  // namespace

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail("checkpoint: cannot parse number '", s, "'");
  return v;
}

Checkpoint Checkpoint::capture(const ParameterList& list) {
  Checkpoint c;
  for (const auto* p : list) {
    if (c.params.count(p->name())) fail("checkpoint: duplicate parameter name '", p->name(), "'");
    c.params[p->name()] = p->value();
  }
  return c;
}

void Checkpoint::restore(const ParameterList& list) const {
  for (auto* p : list) {
    auto it = params.find(p->name());
    if (it == params.end()) fail("checkpoint: missing parameter '", p->name(), "'");
    p->set_value(it->second);
  }
}

std::string Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["meta"] = meta;
  nlohmann::json ps = nlohmann::json::object();
  for (const auto& [name, m] : params) {
    nlohmann::json values = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) values.push_back(hexfloat(m(r, c)));
    ps[name] = {{"shape", {m.rows(), m.cols()}}, {"values", values}};
  }
  j["params"] = ps;
  return j.dump(1);
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail("checkpoint: malformed document: ", e.what());
  }
  if (j.value("format", std::string{}) != kFormat) fail("checkpoint: not a checkpoint document");
  if (j.value("version", 0) != kVersion) fail("checkpoint: unsupported version ", j.value("version", 0));
  Checkpoint c;
  if (j.contains("meta")) c.meta = j["meta"].get<std::map<std::string, std::string>>();
  for (const auto& [name, entry] : j.at("params").items()) {
    const auto shape = entry.at("shape").get<std::vector<Index>>();
    if (shape.size() != 2) fail("checkpoint: parameter '", name, "' must have a 2-d shape");
    const auto& values = entry.at("values");
    if (static_cast<Index>(values.size()) != shape[0] * shape[1]) {
      fail("checkpoint: parameter '", name, "' has ", values.size(), " values for shape ", shape[0], "x", shape[1]);
    }
    Mat m(shape[0], shape[1]);
    std::size_t k = 0;
    for (Index r = 0; r < shape[0]; ++r)
      for (Index col = 0; col < shape[1]; ++col) m(r, col) = parse_hexfloat(values[k++].get<std::string>());
    c.params[name] = std::move(m);
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail("checkpoint: cannot write ", path.string());
  out << to_json();
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("checkpoint: cannot read ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace tomsc::nn
