#include "tomsc/exp/manifest.hpp"

#include "tomsc/common.hpp"
#include "tomsc/exp/hash.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#ifndef TOMSC_VERSION
#define TOMSC_VERSION "unknown"
#endif

namespace tomsc::exp {

using nlohmann::json;

std::string code_version() { return TOMSC_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_file(const std::filesystem::path& root, const std::filesystem::path& file) {
  const auto rel = std::filesystem::relative(file, root).generic_string();
  if (rel.empty() || rel.starts_with("..")) fail("manifest: ", file.string(), " is outside ", root.string());
  for (const auto& f : files) {
    if (f.path == rel) fail("manifest: ", rel, " listed twice");
  }
  files.push_back({rel, sha256_file(file)});
}

bool RunManifest::all_ok() const {
  for (const auto& c : cells) {
    if (c.status != "ok") return false;
  }
  return true;
}

std::string RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["config"] = config_ini;
  j["code_version"] = code_version;
  j["started_at"] = started_at;
  j["cells"] = json::array();
  for (const auto& c : cells) j["cells"].push_back({{"id", c.id}, {"status", c.status}, {"seconds", c.seconds}});
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config_ini = j.at("config").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    for (const auto& c : j.at("cells")) {
      m.cells.push_back({c.at("id").get<std::string>(), c.at("status").get<std::string>(), c.at("seconds").get<double>()});
    }
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail("manifest: ", e.what());
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("manifest: cannot write ", path.string());
  out << to_json();
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("manifest: cannot read ", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::vector<std::string> RunManifest::verify(const std::filesystem::path& root) const {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& f : files) {
    if (!seen.insert(f.path).second) {
      problems.push_back(concat(f.path, ": listed more than once"));
      continue;
    }
    const auto p = root / f.path;
    if (!std::filesystem::exists(p)) {
      problems.push_back(concat(f.path, ": missing"));
    } else if (sha256_file(p) != f.sha256) {
      problems.push_back(concat(f.path, ": hash mismatch"));
    }
  }
  if (sha256_hex(config_ini) != config_hash) problems.push_back("config hash does not match the recorded config");
  return problems;
}

}  // namespace tomsc::exp
