#pragma once

#include "impact/cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace impact::cli {

namespace fs = std::filesystem;

struct OutputFile {
  std::string path;  // relative to the run directory
  std::uintmax_t bytes = 0;
  std::string sha256;

  bool operator==(const OutputFile&) const = default;
};

struct RunManifest {
  std::string tool = "impactsim";
  std::string version;
  std::string experiment;
  std::uint64_t seed = 0;
  Json config;
  std::string started_utc;
  double wall_seconds = 0.0;
  /// Per-stage summary statistics, in execution order.
  Json stages = Json::object();
  std::vector<OutputFile> outputs;
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

/// Reads a manifest; DataError when missing or malformed.
RunManifest read_manifest(const fs::path& path);

/// Writes content to path via a temporary sibling and rename.
void write_atomic(const fs::path& path, const std::string& content);

std::string sha256_hex(const fs::path& path);

/// The output directory of one run. Files are addressed by relative names,
/// which may not leave the directory.
class OutputDir {
 public:
  explicit OutputDir(fs::path root);

  const fs::path& root() const { return root_; }
  /// Path for a new output file; the name is recorded for the inventory.
  fs::path file(const std::string& name);
  /// Writes a JSON document as an output file.
  void json(const std::string& name, const Json& doc);
  /// Size and digest of every recorded file, in creation order.
  std::vector<OutputFile> inventory() const;

 private:
  fs::path root_;
  std::vector<std::string> names_;
};

}  // namespace impact::cli
