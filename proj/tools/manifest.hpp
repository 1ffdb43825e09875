#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "condbohm/report.hpp"

namespace condbohm::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestFile {
  std::string path;  // relative to the output directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string artifact = "condbohm";
  std::string version;
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string config;  // canonical config text
  std::string started_utc;
  std::string finished_utc;
  std::vector<ManifestFile> files;
};

/// Hashes `files` (relative to dir) into the manifest entries.
void add_files(RunManifest& manifest, const std::filesystem::path& dir, const std::vector<std::filesystem::path>& files);

Json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const Json& j);

inline constexpr const char* kManifestName = "manifest.json";

/// Writes dir/manifest.json; call after every other output is closed.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

/// Files whose current digest differs from the manifest (or are missing).
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

/// ISO 8601 UTC timestamp with second resolution.
std::string utc_now();

}  // namespace condbohm::cli
