#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace risktube::cli {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
// Throws IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<std::string> tags;

  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
  nlohmann::json to_json() const;
  // Written next to the primary output as <output>.manifest.json.
  std::filesystem::path write(const std::filesystem::path& primary_output) const;
};

}  // namespace risktube::cli
