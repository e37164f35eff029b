#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace hitforge {

// 64-bit FNV-1a over the file bytes, hex encoded. An audit digest for the
// run manifests, not a cryptographic hash.
std::string file_digest(const std::filesystem::path& path);

// One manifest per pipeline stage, written next to that stage's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> flags;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  std::string tool_version;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string utc_now_iso8601();

}  // namespace hitforge
