#ifndef SWARMRECON_BASELINES_H_
#define SWARMRECON_BASELINES_H_

#include <functional>
#include <vector>

#include "swarmrecon/actor.h"
#include "swarmrecon/demos.h"
#include "swarmrecon/magail.h"
#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"

namespace swarmrecon {

// ---------------------------------------------------------------------------
// Behaviour cloning: one independent classifier per agent, mapping that
// agent's raw observations to the demonstrated action.

struct BcConfig {
  std::vector<int> hidden = {128, 128, 128};
  int epochs = 200;
  double learning_rate = 3e-4;
  int batch_size = 256;
  double validation_fraction = 0.1;
};

struct BcModel {
  std::vector<Mlp> networks;  // one per agent, softmax over kNumActions
};

struct BcAgentStats {
  double initial_validation_loss = 0.0;
  double best_validation_loss = 0.0;
  int best_epoch = 0;
  int train_samples = 0;
  int validation_samples = 0;
};

struct BcResult {
  BcModel model;
  std::vector<BcAgentStats> stats;
};

// Each network keeps the parameters of its best validation epoch.
BcResult TrainBc(const DemoPool& demos, const ScenarioConfig& config,
                 const BcConfig& bc, std::uint64_t seed, int jobs = 1);

ActResult ActBc(const BcModel& model, int agent_index, const Observation& obs,
                ActMode mode, Rng& rng);

class BcActor : public Actor {
 public:
  BcActor(const BcModel& model, ActMode mode) : model_(&model), mode_(mode) {}
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override {
    return ActBc(*model_, agent_index, obs, mode_, rng).action;
  }

 private:
  const BcModel* model_;
  ActMode mode_;
};

// ---------------------------------------------------------------------------
// PS-AIRL reconstruction: a single shared structured discriminator
//   D(f, a) = exp(g(f, a)) / (exp(g(f, a)) + pi(a | o))
// over (cohesion feature of the acting state, one-hot action), trained with
// expert = 1, learner = 0. The learner reward is log D - log(1 - D), which
// equals g(f, a) - log pi(a | o).

struct AirlModel {
  SharedPolicy policy;
  Mlp reward_net;  // linear scalar head
};

struct AirlLogRow {
  int episode = 0;
  double disc_reward_mean = 0.0;
  double true_reward_mean = 0.0;
  bool disc_updated = false;
  double disc_loss = 0.0;
  double disc_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct AirlResult {
  AirlModel model;
  std::vector<AirlLogRow> log;
};

// Discriminator logit g - log pi.
double AirlLogit(const Mlp& reward_net, const FeatureVector& feature_with_action,
                 double log_pi);
// log D - log(1 - D) evaluated through the sigmoid of the logit.
double AirlRewardFromDiscriminator(const Mlp& reward_net,
                                   const FeatureVector& feature_with_action,
                                   double log_pi);

using AirlProgressFn = std::function<void(const AirlLogRow&)>;

AirlResult TrainAirl(const ScenarioConfig& config, const DemoPool& demos,
                     const GailSchedule& schedule, const PpoConfig& ppo,
                     const DiscriminatorConfig& disc, std::uint64_t seed,
                     const AirlProgressFn& progress = {});

void WriteAirlCsv(std::ostream& out, const std::vector<AirlLogRow>& log);

}  // namespace swarmrecon

#endif  // SWARMRECON_BASELINES_H_
