#ifndef SWARMRECON_CHECKPOINT_H_
#define SWARMRECON_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmrecon/actor.h"
#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {

inline constexpr int kCheckpointVersion = 1;

enum class ModelKind { kExpert, kMagail, kBc, kAirl };
std::string_view ModelKindName(ModelKind kind);
std::optional<ModelKind> ParseModelKind(std::string_view name);

struct CheckpointMetadata {
  ScenarioConfig scenario;
  std::uint64_t seed = 0;
  int episodes = 0;      // training episodes (BC: epochs)
  int demonstrations = 0;  // learners only
  std::string manifest;  // path of the run manifest that produced it
};

// Versioned JSON document: networks as layer sizes, head kind and a flat
// parameter array, plus a metadata block.
struct Checkpoint {
  ModelKind kind = ModelKind::kExpert;
  CheckpointMetadata metadata;
  std::optional<SharedPolicy> policy;  // expert, MA-GAIL, AIRL
  std::vector<Mlp> discriminators;     // MA-GAIL
  std::vector<Mlp> bc_networks;        // BC
  std::optional<Mlp> reward_net;       // AIRL

  // Throws PreconditionError when the networks required by `kind` are absent.
  void Check() const;
};

std::string CheckpointToJson(const Checkpoint& checkpoint);
// Throws FormatError on malformed input or a version mismatch.
Checkpoint CheckpointFromJson(std::string_view text);

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// An actor that owns the acting networks of a checkpoint.
std::unique_ptr<Actor> MakeCheckpointActor(const Checkpoint& checkpoint, ActMode mode);

}  // namespace swarmrecon

#endif  // SWARMRECON_CHECKPOINT_H_
