#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tomsc::exp {

struct ManifestCell {
  std::string id;
  std::string status;  ///< "ok" or "failed: <reason>"
  double seconds = 0.0;
};

struct ManifestFile {
  std::string path;  ///< relative to the manifest directory
  std::string sha256;
};

/// Record of one figure run: configuration, code version, per-cell status
/// and a hash for every output file.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string config_ini;
  std::string code_version;
  std::string started_at;  ///< UTC, ISO 8601
  std::vector<ManifestCell> cells;
  std::vector<ManifestFile> files;

  /// Hashes `file` (which must live under `root`) and lists it; listing a path twice is an error.
  void add_file(const std::filesystem::path& root, const std::filesystem::path& file);
  bool all_ok() const;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);

  /// Problems found when rechecking the listed files under `root`; empty when consistent.
  std::vector<std::string> verify(const std::filesystem::path& root) const;
};

std::string code_version();
std::string utc_timestamp();

}  // namespace tomsc::exp
