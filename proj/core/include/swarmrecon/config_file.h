#ifndef SWARMRECON_CONFIG_FILE_H_
#define SWARMRECON_CONFIG_FILE_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "swarmrecon/scenario.h"

namespace swarmrecon {

// Scenario configuration files are a small TOML subset:
//
//   # comment
//   kind = "homing"
//   grid_size = 10
//   fixed_entities = [[1, 1], [8, 1], [4, 8]]
//
// Every ScenarioConfig field is a key. `kind` is read first so that omitted
// keys fall back to that scenario's defaults. Unknown keys and malformed
// values raise ConfigError naming the line.
ScenarioConfig ParseScenarioConfig(std::string_view text,
                                   std::string_view source_name = "<string>");
ScenarioConfig LoadScenarioConfig(const std::filesystem::path& path);

std::string FormatScenarioConfig(const ScenarioConfig& config);

}  // namespace swarmrecon

#endif  // SWARMRECON_CONFIG_FILE_H_
