#ifndef SWARMRECON_MANIFEST_H_
#define SWARMRECON_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarmrecon/scenario.h"

namespace swarmrecon {

// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string GitBlobHash(std::string_view content);
// Throws std::runtime_error if the file cannot be read.
std::string HashFile(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

// UTC, ISO 8601 with seconds.
std::string UtcTimestamp();

struct ManifestInput {
  std::string path;
  std::string hash;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::optional<ScenarioConfig> scenario;
  // Resolved options other than the scenario, as name/value text.
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<ManifestInput> inputs;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;
  std::string status = "running";

  std::string ToJson() const;
  static RunManifest FromJson(std::string_view text);
};

void WriteManifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace swarmrecon

#endif  // SWARMRECON_MANIFEST_H_
