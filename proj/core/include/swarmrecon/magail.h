#ifndef SWARMRECON_MAGAIL_H_
#define SWARMRECON_MAGAIL_H_

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swarmrecon/demos.h"
#include "swarmrecon/features.h"
#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"

namespace swarmrecon {

// Policy recovery with one discriminator per agent. Every discriminator sees
// its own agent's learner features against the pooled cohesion features of all
// demonstrating agents, and the shared PS-MAPPO policy is trained on the
// discriminator-derived per-agent rewards.
//
// Class convention (as printed in the GAIL objective used here): a
// discriminator is trained towards 1 on learner features and towards 0 on
// expert features. `swap_convention` flips the labels.

enum class RewardMode {
  kAlgorithmOne,     // log D + log(1 - D), peaks at D = 0.5
  kLogD,             // log D
  kNegLogOneMinusD,  // -log(1 - D)
};

std::string_view RewardModeName(RewardMode mode);
std::optional<RewardMode> ParseRewardMode(std::string_view name);

// Discriminator outputs are clamped to [kProbClamp, 1 - kProbClamp] before
// any logarithm.
inline constexpr double kProbClamp = 1e-7;
double ClampProbability(double d);

struct GailSchedule {
  int init_episode = 50;
  int early_interval = 50;
  int early_until = 1000;
  int late_interval = 500;
  int total_episodes = 10000;
  int disc_epochs_per_update = 5;
  int disc_batch_size = 256;
  int learner_buffer_episodes = 50;

  void Validate() const;
  // True when the discriminators are trained at the end of `episode`
  // (1-based).
  bool IsUpdateEpisode(int episode) const;
  std::vector<int> UpdateEpisodes() const;
};

struct DiscriminatorConfig {
  std::vector<int> hidden = {128, 128};
  double learning_rate = 1e-5;
};

struct DiscriminatorBank {
  std::vector<Mlp> discriminators;
  std::vector<AdamState> optimizers;
};

DiscriminatorBank MakeDiscriminatorBank(int n_agents, int feature_size,
                                        const DiscriminatorConfig& config, Rng& rng);

// -(mean log D(learner) + mean log(1 - D(expert))), with clamping.
double DiscriminatorLoss(std::span<const double> disc_output_expert,
                         std::span<const double> disc_output_learner);

double RewardFromProbability(double d, RewardMode mode);
double LearnerReward(const Mlp& disc, const FeatureVector& feature, RewardMode mode);

// Features as columns.
using FeatureMatrix = Eigen::MatrixXd;
FeatureMatrix ToMatrix(const std::vector<FeatureVector>& features);
// Pooled cohesion features of every agent in every post-step state.
FeatureMatrix PooledExpertFeatures(const DemoPool& demos);

struct DiscriminatorTrainStats {
  double loss = 0.0;      // on the full learner set vs. an equal expert sample
  double accuracy = 0.0;  // fraction classified on the correct side of 0.5
  int steps = 0;
};

// Balanced minibatches: each step draws batch/2 learner columns (an epoch is
// one shuffled pass over `learner`) and batch/2 expert columns uniformly with
// replacement.
DiscriminatorTrainStats TrainDiscriminator(Mlp& disc, AdamState& optimizer,
                                           const FeatureMatrix& learner,
                                           const FeatureMatrix& expert, int epochs,
                                           int batch_size, bool swap_convention,
                                           Rng& rng);

// Accuracy of `disc` separating the two populations under the convention.
double DiscriminatorAccuracy(const Mlp& disc, const FeatureMatrix& learner,
                             const FeatureMatrix& expert, bool swap_convention);

struct MagailOptions {
  RewardMode reward_mode = RewardMode::kAlgorithmOne;
  bool swap_convention = false;
  DiscriminatorConfig discriminator;
  int jobs = 1;  // threads for the per-agent discriminator updates
  // Observes each discriminator update: (agent, expert set, learner set).
  std::function<void(int, const FeatureMatrix&, const FeatureMatrix&)> on_disc_update;
};

struct MagailLogRow {
  int episode = 0;
  std::vector<double> disc_reward_mean;  // per agent
  double true_reward_mean = 0.0;         // never shown to the learner
  double disc_output_mean = 0.0;         // mean D on this episode's features
  bool disc_updated = false;
  std::vector<double> disc_loss;      // latest update, per agent
  std::vector<double> disc_accuracy;  // latest update, per agent
  double wall_seconds = 0.0;
};

struct MagailResult {
  SharedPolicy policy;
  DiscriminatorBank bank;
  std::vector<MagailLogRow> log;
};

using MagailProgressFn = std::function<void(const MagailLogRow&)>;

MagailResult TrainMagail(const ScenarioConfig& config, const DemoPool& demos,
                         const GailSchedule& schedule, const PpoConfig& ppo,
                         const MagailOptions& options, std::uint64_t seed,
                         const MagailProgressFn& progress = {});

void WriteMagailCsv(std::ostream& out, const std::vector<MagailLogRow>& log);

// Rejects demonstrations that are empty or recorded in another scenario.
void CheckDemos(const ScenarioConfig& config, const DemoPool& demos);

}  // namespace swarmrecon

#endif  // SWARMRECON_MAGAIL_H_
