#include "swarmrecon/baselines.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "swarmrecon/error.h"
#include "swarmrecon/features.h"
#include "test_helpers.h"

namespace swarmrecon {
namespace {

BcConfig SmallBc() {
  BcConfig bc;
  bc.hidden = {32, 32};
  bc.epochs = 20;
  bc.learning_rate = 1e-3;
  return bc;
}

double BcAccuracy(const BcModel& model, const DemoPool& pool) {
  int hits = 0, total = 0;
  Rng rng = MakeRng(0, "unused");
  for (const Trajectory& t : pool.trajectories) {
    for (const StepRecord& s : t.steps) {
      for (std::size_t a = 0; a < s.actions.size(); ++a) {
        const Action got = ActBc(model, static_cast<int>(a), s.observations[a],
                                 ActMode::kGreedy, rng).action;
        hits += got == s.actions[a];
        ++total;
      }
    }
  }
  return static_cast<double>(hits) / total;
}

TEST(BcTest, ConstantExpertIsClonedExactly) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const ConstantActor expert(Action::kRight);
  const DemoPool pool = GenerateDemos(expert, config, 20, 0.0, UniformRandom{}, 3);
  const BcResult result = TrainBc(pool, config, SmallBc(), 4);
  // Held-out states.
  const DemoPool held_out = GenerateDemos(expert, config, 10, 0.0, UniformRandom{}, 9);
  EXPECT_GE(BcAccuracy(result.model, held_out), 0.99);
}

TEST(BcTest, ValidationLossDoesNotIncrease) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const DemoPool pool = testing::SeekDemos(ScenarioKind::kHoming, 40, 1);
  const BcResult result = TrainBc(pool, config, SmallBc(), 2);
  ASSERT_EQ(result.stats.size(), 3u);
  for (const BcAgentStats& s : result.stats) {
    EXPECT_LE(s.best_validation_loss, s.initial_validation_loss);
    EXPECT_EQ(s.train_samples + s.validation_samples, 40 * 50);
    EXPECT_EQ(s.validation_samples, 200);
    EXPECT_GE(s.best_epoch, 0);
    EXPECT_LE(s.best_epoch, 20);
  }
  EXPECT_GT(BcAccuracy(result.model, testing::SeekDemos(ScenarioKind::kHoming, 10, 2)), 0.7);
}

TEST(BcTest, NetworksAreIndependentAndDeterministic) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kAggregation);
  const DemoPool pool = testing::SeekDemos(ScenarioKind::kAggregation, 10, 1);
  BcConfig bc = SmallBc();
  bc.epochs = 3;
  const BcResult a = TrainBc(pool, config, bc, 5);
  const BcResult b = TrainBc(pool, config, bc, 5, 3);
  ASSERT_EQ(a.model.networks.size(), 3u);
  for (int n = 0; n < 3; ++n) {
    EXPECT_EQ(a.model.networks[n].params(), b.model.networks[n].params());
    EXPECT_EQ(a.model.networks[n].layer_sizes(),
              (std::vector<int>{ObservationSize(config), 32, 32, kNumActions}));
  }
  EXPECT_NE(a.model.networks[0].params(), a.model.networks[1].params());
}

TEST(BcTest, ZeroNetworkActsStopAndChecksAgent) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  BcModel model;
  for (int n = 0; n < 3; ++n) {
    model.networks.emplace_back(std::vector<int>{ObservationSize(config), 4, kNumActions},
                                Head::kSoftmax);
  }
  Rng rng = MakeRng(1, "x");
  const Observation obs(ObservationSize(config), 0.1);
  const ActResult r = ActBc(model, 0, obs, ActMode::kGreedy, rng);
  EXPECT_EQ(r.action, Action::kStop);
  EXPECT_THROW(ActBc(model, 3, obs, ActMode::kGreedy, rng), PreconditionError);
  EXPECT_THROW(ActBc(model, -1, obs, ActMode::kGreedy, rng), PreconditionError);
}

TEST(BcTest, RejectsEmptyPool) {
  DemoPool pool = testing::SeekDemos(ScenarioKind::kHoming, 1, 1);
  pool.trajectories.clear();
  EXPECT_THROW(TrainBc(pool, DefaultConfig(ScenarioKind::kHoming), SmallBc(), 1),
               PreconditionError);
}

TEST(AirlTest, RewardEqualsLogitIdentity) {
  Rng rng = MakeRng(2, "airl");
  const Mlp g = Mlp::Create({9, 16, 1}, Head::kLinear, rng);
  for (int k = 0; k < 200; ++k) {
    FeatureVector f(9);
    for (double& v : f) v = StandardNormal(rng);
    const double log_pi = std::log(0.01 + 0.99 * Uniform01(rng));
    const double expected = g.Forward(Eigen::Map<const Eigen::VectorXd>(f.data(), 9))(0) - log_pi;
    EXPECT_NEAR(AirlLogit(g, f, log_pi), expected, 1e-12);
    EXPECT_NEAR(AirlRewardFromDiscriminator(g, f, log_pi), expected, 1e-9);
  }
}

TEST(AirlTest, ShortRunScoresExpertAboveRandom) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const DemoPool demos = testing::SeekDemos(ScenarioKind::kHoming, 30, 1);
  GailSchedule s;
  s.init_episode = 10;
  s.early_interval = 10;
  s.early_until = 40;
  s.late_interval = 20;
  s.total_episodes = 40;
  s.learner_buffer_episodes = 10;
  PpoConfig ppo;
  ppo.hidden = {16};
  ppo.epochs = 2;
  DiscriminatorConfig disc;
  disc.hidden = {32};
  disc.learning_rate = 1e-3;
  const AirlResult r = TrainAirl(config, demos, s, ppo, disc, 4);
  ASSERT_EQ(r.log.size(), 40u);
  int updates = 0;
  for (const AirlLogRow& row : r.log) {
    updates += row.disc_updated;
    EXPECT_TRUE(std::isfinite(row.disc_reward_mean));
  }
  EXPECT_EQ(updates, 4);
  EXPECT_EQ(r.model.reward_net.input_size(), FeatureSize(config) + kNumActions);

  // Mean g on held-out expert state-action pairs exceeds that on random ones.
  auto mean_g = [&](const DemoPool& pool) {
    double sum = 0;
    int n = 0;
    for (const Trajectory& t : pool.trajectories) {
      GridState state = t.initial;
      for (const StepRecord& step : t.steps) {
        for (int a = 0; a < config.n_agents; ++a) {
          const FeatureVector f = TransformWithAction(state, a, step.actions[a], config);
          sum += AirlLogit(r.model.reward_net, f, 0.0);
          ++n;
        }
        state.agents = step.positions;
      }
    }
    return sum / n;
  };
  EXPECT_GT(mean_g(testing::SeekDemos(ScenarioKind::kHoming, 10, 7)),
            mean_g(testing::SeekDemos(ScenarioKind::kHoming, 10, 8, 1.0)));
  const AirlResult again = TrainAirl(config, demos, s, ppo, disc, 4);
  EXPECT_EQ(again.model.reward_net.params(), r.model.reward_net.params());
}

TEST(AirlTest, CsvHeader) {
  std::ostringstream out;
  WriteAirlCsv(out, {AirlLogRow{}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "episode,disc_reward,true_reward,disc_updated,disc_loss,disc_accuracy,wall_seconds");
}

}  // namespace
}  // namespace swarmrecon
