#include "hitforge/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "hitforge/types.hpp"
#include "hitforge/version.hpp"

namespace hitforge {

using nlohmann::json;

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot digest missing file " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  input_digests[path.filename().string()] = file_digest(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
  output_digests[path.filename().string()] = file_digest(path);
}

json RunManifest::to_json() const {
  json doc;
  doc["command"] = command;
  json f = json::object();
  for (const auto& [k, v] : flags) f[k] = v;
  doc["flags"] = std::move(f);
  doc["seed"] = seed;
  doc["input_digests"] = input_digests;
  doc["output_digests"] = output_digests;
  doc["tool_version"] = tool_version.empty() ? kVersion : tool_version;
  doc["started_at"] = started_at;
  doc["finished_at"] = finished_at;
  return doc;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
}

}  // namespace hitforge
