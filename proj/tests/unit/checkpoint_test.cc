#include "swarmrecon/checkpoint.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "swarmrecon/error.h"
#include "swarmrecon/manifest.h"

namespace swarmrecon {
namespace {

namespace fs = std::filesystem;

Checkpoint ExpertCheckpoint() {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  Rng rng = MakeRng(3, "policy-init");
  PpoConfig ppo;
  ppo.hidden = {8};
  Checkpoint c;
  c.kind = ModelKind::kExpert;
  c.metadata.scenario = config;
  c.metadata.seed = 3;
  c.metadata.episodes = 12;
  c.metadata.manifest = "run.manifest.json";
  c.policy = MakeSharedPolicy(ObservationSize(config), ppo, rng);
  return c;
}

TEST(CheckpointTest, KindNames) {
  for (ModelKind k : {ModelKind::kExpert, ModelKind::kMagail, ModelKind::kBc, ModelKind::kAirl}) {
    EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  }
  EXPECT_FALSE(ParseModelKind("gail").has_value());
}

TEST(CheckpointTest, JsonRoundTripIsBitExact) {
  const Checkpoint c = ExpertCheckpoint();
  const Checkpoint back = CheckpointFromJson(CheckpointToJson(c));
  EXPECT_EQ(back.kind, ModelKind::kExpert);
  EXPECT_EQ(back.metadata.scenario, c.metadata.scenario);
  EXPECT_EQ(back.metadata.seed, 3u);
  EXPECT_EQ(back.metadata.episodes, 12);
  EXPECT_EQ(back.metadata.manifest, "run.manifest.json");
  ASSERT_TRUE(back.policy.has_value());
  EXPECT_EQ(back.policy->actor.params(), c.policy->actor.params());
  EXPECT_EQ(back.policy->critic.params(), c.policy->critic.params());
  EXPECT_EQ(CheckpointToJson(back), CheckpointToJson(c));
}

TEST(CheckpointTest, LearnerKindsRoundTrip) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kAggregation);
  Rng rng = MakeRng(1, "x");
  Checkpoint bc;
  bc.kind = ModelKind::kBc;
  bc.metadata.scenario = config;
  for (int n = 0; n < 3; ++n) {
    bc.bc_networks.push_back(
        Mlp::Create({ObservationSize(config), 4, kNumActions}, Head::kSoftmax, rng));
  }
  const Checkpoint bc_back = CheckpointFromJson(CheckpointToJson(bc));
  ASSERT_EQ(bc_back.bc_networks.size(), 3u);
  EXPECT_EQ(bc_back.bc_networks[2].params(), bc.bc_networks[2].params());
  EXPECT_NE(MakeCheckpointActor(bc_back, ActMode::kGreedy), nullptr);

  Checkpoint gail = ExpertCheckpoint();
  gail.kind = ModelKind::kMagail;
  gail.metadata.demonstrations = 400;
  EXPECT_THROW(gail.Check(), PreconditionError);
  for (int n = 0; n < 3; ++n) gail.discriminators.push_back(Mlp::Create({5, 4, 1}, Head::kSigmoid, rng));
  EXPECT_NO_THROW(gail.Check());
  const Checkpoint gail_back = CheckpointFromJson(CheckpointToJson(gail));
  EXPECT_EQ(gail_back.metadata.demonstrations, 400);
  EXPECT_EQ(gail_back.discriminators[1].params(), gail.discriminators[1].params());

  Checkpoint airl = ExpertCheckpoint();
  airl.kind = ModelKind::kAirl;
  EXPECT_THROW(airl.Check(), PreconditionError);
  airl.reward_net = Mlp::Create({10, 4, 1}, Head::kLinear, rng);
  EXPECT_EQ(CheckpointFromJson(CheckpointToJson(airl)).reward_net->params(),
            airl.reward_net->params());
}

TEST(CheckpointTest, ActorMatchesPolicy) {
  const Checkpoint c = ExpertCheckpoint();
  const auto actor = MakeCheckpointActor(c, ActMode::kGreedy);
  const Observation obs(ObservationSize(c.metadata.scenario), 0.2);
  Rng a = MakeRng(1, "p"), b = MakeRng(1, "p");
  EXPECT_EQ(actor->Act(0, obs, a), Act(*c.policy, obs, ActMode::kGreedy, b).action);
}

TEST(CheckpointTest, RejectsCorruptAndForeignFiles) {
  const std::string text = CheckpointToJson(ExpertCheckpoint());
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_THROW(CheckpointFromJson(wrong_version), FormatError);
  EXPECT_THROW(CheckpointFromJson(text.substr(0, text.size() / 2)), FormatError);
  EXPECT_THROW(CheckpointFromJson("{\"format\":\"other\"}"), FormatError);
  std::string bad_kind = text;
  bad_kind.replace(bad_kind.find("\"expert\""), 8, "\"oracle\"");
  EXPECT_THROW(CheckpointFromJson(bad_kind), FormatError);
  std::string no_policy = CheckpointToJson(ExpertCheckpoint());
  EXPECT_THROW(CheckpointFromJson(
                   no_policy.substr(0, no_policy.find(",\"policy\"")) + "}"),
               FormatError);
}

TEST(CheckpointTest, SaveLoadFile) {
  const fs::path dir = fs::temp_directory_path() / "swarmrecon_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Checkpoint c = ExpertCheckpoint();
  SaveCheckpoint(c, dir / "expert.json");
  EXPECT_FALSE(fs::exists(dir / "expert.json.tmp"));
  EXPECT_EQ(CheckpointToJson(LoadCheckpoint(dir / "expert.json")), CheckpointToJson(c));
  EXPECT_ANY_THROW(LoadCheckpoint(dir / "missing.json"));
}

}  // namespace
}  // namespace swarmrecon
