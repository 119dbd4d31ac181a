#include "swarmrecon/ppo.h"

#include <gtest/gtest.h>

#include <cmath>

#include "swarmrecon/error.h"
#include "support/oracles.h"

namespace swarmrecon {
namespace {

SharedPolicy ZeroPolicy(int obs) {
  return {Mlp({obs, 8, kNumActions}, Head::kSoftmax), Mlp({obs, 8, 1}, Head::kLinear)};
}

using oracles::BruteForceGae;
using oracles::RandomBuffer;

TEST(GaeOracleTest, MatchesBruteForceDoubleSum) {
  Rng rng = MakeRng(17, "gae-oracle");
  for (int trial = 0; trial < 1000; ++trial) {
    PpoConfig cfg;
    cfg.gamma = 0.999 * Uniform01(rng);
    cfg.gae_lambda = Uniform01(rng);
    const RolloutBuffer b = RandomBuffer(2, 5, rng, trial % 2 == 1);
    const GaeResult g = ComputeGae(b, cfg);
    for (std::size_t i = 0; i < b.agents.size(); ++i) {
      const auto expected = BruteForceGae(b.agents[i], cfg.gamma, cfg.gae_lambda);
      for (std::size_t t = 0; t < expected.size(); ++t) {
        ASSERT_NEAR(g.advantages[i][t], expected[t], 1e-10) << "trial " << trial;
        ASSERT_NEAR(g.returns[i][t], expected[t] + b.agents[i].values[t], 1e-10);
      }
    }
  }
}

TEST(GaeTest, LambdaZeroIsTdError) {
  Rng rng = MakeRng(1, "gae");
  PpoConfig cfg;
  cfg.gae_lambda = 0.0;
  const RolloutBuffer b = RandomBuffer(1, 6, rng, false);
  const GaeResult g = ComputeGae(b, cfg);
  const AgentRollout& a = b.agents[0];
  for (std::size_t t = 0; t < 6; ++t) {
    const double next = t + 1 < 6 ? a.values[t + 1] : 0.0;
    EXPECT_NEAR(g.advantages[0][t], a.rewards[t] + cfg.gamma * next - a.values[t], 1e-12);
  }
}

TEST(GaeTest, GammaZeroIsRewardMinusValue) {
  Rng rng = MakeRng(2, "gae");
  PpoConfig cfg;
  cfg.gamma = 0.0;
  cfg.gae_lambda = 0.7;
  const RolloutBuffer b = RandomBuffer(2, 6, rng, false);
  const GaeResult g = ComputeGae(b, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t t = 0; t < 6; ++t) {
      EXPECT_DOUBLE_EQ(g.advantages[i][t], b.agents[i].rewards[t] - b.agents[i].values[t]);
    }
  }
}

TEST(GaeTest, SingleStepBaseCase) {
  RolloutBuffer b(1);
  b.agents[0] = {{{0.0}}, {0}, {0.0}, {1.0}, {0.0}, {true}, 0.0};
  const GaeResult g = ComputeGae(b, PpoConfig{});
  EXPECT_DOUBLE_EQ(g.advantages[0][0], 1.0);
  EXPECT_DOUBLE_EQ(g.returns[0][0], 1.0);
}

TEST(GaeTest, NormalizedAcrossAgents) {
  Rng rng = MakeRng(3, "gae");
  const GaeResult g = ComputeGae(RandomBuffer(3, 50, rng, false), PpoConfig{});
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (const auto& agent : g.normalized_advantages) {
    for (double v : agent) {
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  EXPECT_NEAR(sum / n, 0.0, 1e-12);
  EXPECT_NEAR(sq / n, 1.0, 1e-9);
}

TEST(GaeTest, EmptyOrRaggedBufferRejected) {
  EXPECT_THROW(ComputeGae(RolloutBuffer(2), PpoConfig{}), PreconditionError);
  Rng rng = MakeRng(4, "gae");
  RolloutBuffer b = RandomBuffer(2, 5, rng, false);
  b.agents[1].rewards.pop_back();
  EXPECT_THROW(ComputeGae(b, PpoConfig{}), PreconditionError);
}

TEST(ActTest, ZeroActorGreedyPicksStop) {
  const SharedPolicy p = ZeroPolicy(4);
  Rng rng = MakeRng(1, "act");
  const ActResult r = Act(p, Observation(4, 0.3), ActMode::kGreedy, rng);
  EXPECT_EQ(r.action, Action::kStop);
  EXPECT_NEAR(r.log_prob, std::log(0.2), 1e-12);
}

TEST(ActTest, ZeroActorSamplesUniformly) {
  const SharedPolicy p = ZeroPolicy(4);
  Rng rng = MakeRng(2, "act");
  std::vector<int> counts(kNumActions, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<int>(Act(p, Observation(4, 0.1), ActMode::kSample, rng).action)];
  const double sigma = std::sqrt(draws * 0.2 * 0.8);
  for (int c : counts) EXPECT_LE(std::abs(c - draws * 0.2), 3 * sigma);
}

TEST(ActTest, LogProbMatchesSoftmax) {
  Rng init = MakeRng(3, "init");
  const SharedPolicy p = MakeSharedPolicy(6, PpoConfig{}, init);
  Rng rng = MakeRng(3, "act");
  for (int i = 0; i < 100; ++i) {
    Observation obs(6);
    for (double& v : obs) v = 2 * Uniform01(rng) - 1;
    const ActResult r = Act(p, obs, ActMode::kSample, rng);
    const Eigen::VectorXd probs =
        p.actor.Forward(Eigen::Map<const Eigen::VectorXd>(obs.data(), 6));
    EXPECT_NEAR(std::exp(r.log_prob), probs[static_cast<int>(r.action)], 1e-12);
    EXPECT_NEAR(r.value, p.critic.Forward(Eigen::Map<const Eigen::VectorXd>(obs.data(), 6))[0],
                1e-12);
  }
}

TEST(ActTest, DimensionMismatchThrows) {
  const SharedPolicy p = ZeroPolicy(4);
  Rng rng = MakeRng(4, "act");
  EXPECT_THROW(Act(p, Observation(5, 0.0), ActMode::kSample, rng), PreconditionError);
}

TEST(ActTest, ArgMaxLowestIndexOnTies) {
  Eigen::VectorXd v(4);
  v << 0.1, 0.4, 0.4, 0.1;
  EXPECT_EQ(ArgMax(v), 1);
}

TEST(ClippedSurrogateTest, PlateauOutsideBand) {
  EXPECT_EQ(ClippedSurrogateGradient(1.5, 1.0, 0.2), 0.0);
  EXPECT_EQ(ClippedSurrogateGradient(0.5, -1.0, 0.2), 0.0);
  EXPECT_EQ(ClippedSurrogateGradient(1.1, 2.0, 0.2), 2.0);
  EXPECT_EQ(ClippedSurrogateGradient(0.5, 1.0, 0.2), 1.0);
  EXPECT_EQ(ClippedSurrogateGradient(1.5, -1.0, 0.2), -1.0);
  EXPECT_DOUBLE_EQ(ClippedSurrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(ClippedSurrogate(0.5, 1.0, 0.2), 0.5);
  // Derivative by finite differences agrees away from the kinks.
  for (double r : {0.3, 0.9, 1.1, 1.7}) {
    for (double a : {-2.0, 0.7}) {
      const double fd = (ClippedSurrogate(r + 1e-7, a, 0.2) - ClippedSurrogate(r - 1e-7, a, 0.2)) / 2e-7;
      EXPECT_NEAR(ClippedSurrogateGradient(r, a, 0.2), fd, 1e-6);
    }
  }
}

PpoBatch RandomBatch(int n, int obs, Rng& rng, bool zero_advantage) {
  PpoBatch b;
  b.observations.resize(obs, n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < obs; ++i) b.observations(i, k) = 2 * Uniform01(rng) - 1;
    b.actions.push_back(static_cast<int>(UniformIndex(rng, kNumActions)));
    b.old_log_probs[k] = std::log(0.1 + 0.2 * Uniform01(rng));
    b.advantages[k] = zero_advantage ? 0.0 : StandardNormal(rng);
    b.returns[k] = StandardNormal(rng);
  }
  return b;
}

TEST(PpoUpdateTest, ZeroAdvantageNoEntropyLeavesActor) {
  Rng rng = MakeRng(5, "ppo");
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;
  SharedPolicy p = MakeSharedPolicy(3, cfg, rng);
  const Eigen::VectorXd actor = p.actor.params();
  const Eigen::VectorXd critic = p.critic.params();
  PpoOptimizers opt = MakeOptimizers(p, cfg);
  PpoUpdate(p, opt, RandomBatch(40, 3, rng, true), cfg);
  EXPECT_EQ(p.actor.params(), actor);
  EXPECT_NE(p.critic.params(), critic);
}

// Scalar actor objective that PpoUpdate descends.
double ActorLoss(const Mlp& actor, const PpoBatch& b, const PpoConfig& cfg) {
  const Eigen::MatrixXd lp = LogSoftmax(actor.ForwardBatch(b.observations).logits);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < lp.cols(); ++k) {
    const double ratio = std::exp(lp(b.actions[k], k) - b.old_log_probs[k]);
    const double h = -(lp.col(k).array().exp() * lp.col(k).array()).sum();
    loss += -ClippedSurrogate(ratio, b.advantages[k], cfg.clip) - cfg.entropy_coef * h;
  }
  return loss / static_cast<double>(lp.cols());
}

// Adam's first step moves each parameter by -lr * sign(gradient), so the sign
// of the update reveals the analytic gradient; compare with finite differences.
TEST(PpoUpdateTest, FirstStepFollowsFiniteDifferenceGradient) {
  Rng rng = MakeRng(6, "ppo");
  PpoConfig cfg;
  cfg.epochs = 1;
  cfg.hidden = {6};
  cfg.max_grad_norm = 1e9;
  cfg.entropy_coef = 0.05;
  SharedPolicy p = MakeSharedPolicy(3, cfg, rng);
  for (Eigen::Index i = 0; i < p.actor.num_params(); ++i) p.actor.params()[i] = 0.5 * StandardNormal(rng);
  const PpoBatch b = RandomBatch(30, 3, rng, false);
  const Mlp before = p.actor;
  PpoOptimizers opt = MakeOptimizers(p, cfg);
  PpoUpdate(p, opt, b, cfg);
  int checked = 0;
  for (Eigen::Index i = 0; i < before.num_params(); ++i) {
    Mlp plus = before, minus = before;
    plus.params()[i] += 1e-6;
    minus.params()[i] -= 1e-6;
    const double fd = (ActorLoss(plus, b, cfg) - ActorLoss(minus, b, cfg)) / 2e-6;
    if (std::abs(fd) < 1e-4) continue;
    const double step = p.actor.params()[i] - before.params()[i];
    ASSERT_NEAR(step, -cfg.actor_lr * fd / (std::abs(fd) + 1e-8), 1e-4 * cfg.actor_lr)
        << "parameter " << i;
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(PpoUpdateTest, NonFiniteAdvantageDiverges) {
  Rng rng = MakeRng(7, "ppo");
  PpoConfig cfg;
  SharedPolicy p = MakeSharedPolicy(3, cfg, rng);
  PpoOptimizers opt = MakeOptimizers(p, cfg);
  PpoBatch b = RandomBatch(10, 3, rng, false);
  b.advantages[3] = std::nan("");
  EXPECT_THROW(PpoUpdate(p, opt, b, cfg), DivergenceError);
}

TEST(PpoConfigTest, ValidateRanges) {
  PpoConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.gamma = 1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = PpoConfig{};
  c.clip = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = PpoConfig{};
  EXPECT_DOUBLE_EQ(c.gamma, 0.99);
  EXPECT_DOUBLE_EQ(c.gae_lambda, 0.95);
  EXPECT_DOUBLE_EQ(c.clip, 0.2);
  EXPECT_EQ(c.epochs, 15);
  EXPECT_DOUBLE_EQ(c.entropy_coef, 0.01);
  EXPECT_DOUBLE_EQ(c.actor_lr, 5e-4);
  EXPECT_DOUBLE_EQ(c.max_grad_norm, 10.0);
}

TEST(PpoTrainerTest, UpdateClearsBufferAndSharesParameters) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  Rng init = MakeRng(8, "init");
  PpoTrainer trainer(MakeSharedPolicy(ObservationSize(config), PpoConfig{}, init), PpoConfig{},
                     config.n_agents);
  Rng env = MakeRng(8, "env");
  Rng pol = MakeRng(8, "policy");
  const EpisodeRollout ep =
      CollectEpisode(trainer.policy(), config, UniformRandom{}, ActMode::kSample, env, pol);
  ASSERT_EQ(ep.n_steps(), 50);
  AppendEpisode(trainer.buffer(), ep, ep.rewards);
  EXPECT_EQ(trainer.buffer().steps(), 50u);
  EXPECT_TRUE(trainer.buffer().agents[0].dones.back());
  trainer.Update();
  EXPECT_TRUE(trainer.buffer().empty());
  // One network acts for every agent.
  Rng a = MakeRng(1, "x"), b = MakeRng(1, "x");
  const Observation obs = ep.observations[0][0];
  EXPECT_EQ(Act(trainer.policy(), obs, ActMode::kSample, a).log_prob,
            Act(trainer.policy(), obs, ActMode::kSample, b).log_prob);
}

TEST(PpoTrainerTest, NonFiniteRewardRejected) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  Rng init = MakeRng(9, "init");
  const SharedPolicy policy = MakeSharedPolicy(ObservationSize(config), PpoConfig{}, init);
  Rng env = MakeRng(9, "env");
  Rng pol = MakeRng(9, "policy");
  const EpisodeRollout ep =
      CollectEpisode(policy, config, UniformRandom{}, ActMode::kSample, env, pol);
  auto rewards = ep.rewards;
  rewards[10][1] = std::numeric_limits<double>::infinity();
  RolloutBuffer buffer(config.n_agents);
  EXPECT_THROW(AppendEpisode(buffer, ep, rewards), DivergenceError);
}

}  // namespace
}  // namespace swarmrecon
