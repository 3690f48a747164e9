#pragma once
// Run manifests: configuration echo, content hashes of every output file,
// stage timings and selection subset sizes. Re-running with the same inputs
// reproduces identical output hashes.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "monq/errors.hpp"

namespace monq {

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string content_hash(const std::string& body) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body.data(), body.size())));
  return std::string(buf);
}

inline std::string file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for hashing");
  std::string body((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return content_hash(body);
}

struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::pair<std::string, std::string>> output_hashes;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::pair<std::string, long long>> subset_sizes;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    j["seed"] = seed;
    j["threads"] = threads;
    nlohmann::ordered_json hashes;
    for (const auto& [k, v] : output_hashes) hashes[k] = v;
    j["output_hashes"] = hashes;
    nlohmann::ordered_json timings;
    for (const auto& [k, v] : timings_ms) timings[k] = v;
    j["timings_ms"] = timings;
    nlohmann::ordered_json subsets;
    for (const auto& [k, v] : subset_sizes) subsets[k] = v;
    j["subset_sizes"] = subsets;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << to_json().dump(2) << "\n";
  }
};

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }
  double elapsed_s() const { return elapsed_ms() / 1000.0; }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace monq
