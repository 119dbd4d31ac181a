#include "swarmrecon/checkpoint.h"

#include "json_io.h"
#include "swarmrecon/baselines.h"
#include "swarmrecon/error.h"
#include "swarmrecon/manifest.h"

namespace swarmrecon {

using internal::json;

namespace {

constexpr std::string_view kFormat = "swarmrecon.checkpoint";

class OwningPolicyActor : public Actor {
 public:
  OwningPolicyActor(SharedPolicy policy, ActMode mode)
      : policy_(std::move(policy)), actor_(policy_, mode) {}
  OwningPolicyActor(const OwningPolicyActor&) = delete;
  OwningPolicyActor& operator=(const OwningPolicyActor&) = delete;
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override {
    return actor_.Act(agent_index, obs, rng);
  }

 private:
  SharedPolicy policy_;
  PolicyActor actor_;
};

class OwningBcActor : public Actor {
 public:
  OwningBcActor(BcModel model, ActMode mode) : model_(std::move(model)), actor_(model_, mode) {}
  OwningBcActor(const OwningBcActor&) = delete;
  OwningBcActor& operator=(const OwningBcActor&) = delete;
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override {
    return actor_.Act(agent_index, obs, rng);
  }

 private:
  BcModel model_;
  BcActor actor_;
};

json MlpsToJson(const std::vector<Mlp>& nets) {
  json out = json::array();
  for (const Mlp& m : nets) out.push_back(internal::MlpToJson(m));
  return out;
}

std::vector<Mlp> MlpsFromJson(const json& j) {
  std::vector<Mlp> out;
  for (const json& m : j) out.push_back(internal::MlpFromJson(m));
  return out;
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kExpert: return "expert";
    case ModelKind::kMagail: return "magail";
    case ModelKind::kBc: return "bc";
    case ModelKind::kAirl: return "airl";
  }
  return "unknown";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  for (ModelKind k : {ModelKind::kExpert, ModelKind::kMagail, ModelKind::kBc, ModelKind::kAirl}) {
    if (ModelKindName(k) == name) return k;
  }
  return std::nullopt;
}

void Checkpoint::Check() const {
  const int obs = ObservationSize(metadata.scenario);
  auto check_policy = [&] {
    if (!policy) throw PreconditionError("checkpoint lacks a policy");
    if (policy->actor.input_size() != obs || policy->actor.output_size() != kNumActions) {
      throw PreconditionError("policy shape does not match the scenario");
    }
  };
  switch (kind) {
    case ModelKind::kExpert:
      check_policy();
      break;
    case ModelKind::kMagail:
      check_policy();
      if (static_cast<int>(discriminators.size()) != metadata.scenario.n_agents) {
        throw PreconditionError("checkpoint needs one discriminator per agent");
      }
      break;
    case ModelKind::kAirl:
      check_policy();
      if (!reward_net) throw PreconditionError("checkpoint lacks a reward network");
      break;
    case ModelKind::kBc:
      if (static_cast<int>(bc_networks.size()) != metadata.scenario.n_agents) {
        throw PreconditionError("checkpoint needs one BC network per agent");
      }
      for (const Mlp& m : bc_networks) {
        if (m.input_size() != obs || m.output_size() != kNumActions) {
          throw PreconditionError("BC network shape does not match the scenario");
        }
      }
      break;
  }
}

std::string CheckpointToJson(const Checkpoint& c) {
  json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["kind"] = std::string(ModelKindName(c.kind));
  j["metadata"] = {{"scenario", internal::ConfigToJson(c.metadata.scenario)},
                   {"seed", c.metadata.seed},
                   {"episodes", c.metadata.episodes},
                   {"demonstrations", c.metadata.demonstrations},
                   {"manifest", c.metadata.manifest}};
  if (c.policy) j["policy"] = internal::PolicyToJson(*c.policy);
  if (!c.discriminators.empty()) j["discriminators"] = MlpsToJson(c.discriminators);
  if (!c.bc_networks.empty()) j["bc_networks"] = MlpsToJson(c.bc_networks);
  if (c.reward_net) j["reward_net"] = internal::MlpToJson(*c.reward_net);
  return j.dump() + "\n";
}

Checkpoint CheckpointFromJson(std::string_view text) {
  Checkpoint c;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != kFormat) throw FormatError("not a checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    const auto kind = ParseModelKind(j.at("kind").get<std::string>());
    if (!kind) throw FormatError("unknown checkpoint kind");
    c.kind = *kind;
    const json& m = j.at("metadata");
    c.metadata.scenario = internal::ConfigFromJson(m.at("scenario"));
    c.metadata.seed = m.at("seed").get<std::uint64_t>();
    c.metadata.episodes = m.at("episodes").get<int>();
    c.metadata.demonstrations = m.value("demonstrations", 0);
    c.metadata.manifest = m.value("manifest", std::string());
    if (j.contains("policy")) c.policy = internal::PolicyFromJson(j.at("policy"));
    if (j.contains("discriminators")) c.discriminators = MlpsFromJson(j.at("discriminators"));
    if (j.contains("bc_networks")) c.bc_networks = MlpsFromJson(j.at("bc_networks"));
    if (j.contains("reward_net")) c.reward_net = internal::MlpFromJson(j.at("reward_net"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    c.metadata.scenario.Validate();
    c.Check();
  } catch (const std::exception& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
  }
  return c;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  checkpoint.Check();
  WriteFileAtomic(path, CheckpointToJson(checkpoint));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromJson(ReadFile(path));
}

std::unique_ptr<Actor> MakeCheckpointActor(const Checkpoint& checkpoint, ActMode mode) {
  checkpoint.Check();
  if (checkpoint.kind == ModelKind::kBc) {
    return std::make_unique<OwningBcActor>(BcModel{checkpoint.bc_networks}, mode);
  }
  return std::make_unique<OwningPolicyActor>(*checkpoint.policy, mode);
}

}  // namespace swarmrecon
