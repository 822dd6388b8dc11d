#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pcinf {

std::string sha256_hex(std::string_view bytes);
// Throws DataError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

// Everything needed to repeat a run with the same binary version.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string version = PCINF_VERSION;
  std::string input_path;
  std::string input_sha256;
  std::string timestamp;
  double runtime_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);

}  // namespace pcinf
