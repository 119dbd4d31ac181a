#ifndef SWARMRECON_PPO_H_
#define SWARMRECON_PPO_H_

#include <Eigen/Dense>

#include <vector>

#include "swarmrecon/mlp.h"
#include "swarmrecon/rng.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {

// Parameter-shared multi-agent PPO. Defaults follow the common MAPPO settings
// (full-batch updates, 15 epochs, 64-unit hidden layers).
struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 15;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double actor_lr = 5e-4;
  double critic_lr = 5e-4;
  double max_grad_norm = 10.0;
  std::vector<int> hidden = {64, 64};

  void Validate() const;
};

// One actor/critic pair used by every agent.
struct SharedPolicy {
  Mlp actor;   // observation -> softmax over kNumActions
  Mlp critic;  // observation -> scalar value
};

SharedPolicy MakeSharedPolicy(int observation_size, const PpoConfig& config,
                              Rng& rng);

enum class ActMode { kSample, kGreedy };

struct ActResult {
  Action action = Action::kStop;
  double log_prob = 0.0;
  double value = 0.0;
};

// Greedy picks the most probable action, lowest index on ties.
ActResult Act(const SharedPolicy& policy, const Observation& obs, ActMode mode,
              Rng& rng);

// Samples an index from a probability vector (inverse CDF, one uniform draw).
int SampleCategorical(const Eigen::VectorXd& probs, Rng& rng);
int ArgMax(const Eigen::VectorXd& values);

// Per-agent transition sequences collected under the shared policy.
struct AgentRollout {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;
  // Value used after the last entry when it is not terminal.
  double bootstrap_value = 0.0;
};

struct RolloutBuffer {
  std::vector<AgentRollout> agents;

  RolloutBuffer() = default;
  explicit RolloutBuffer(int n_agents) : agents(n_agents) {}

  std::size_t steps() const { return agents.empty() ? 0 : agents.front().rewards.size(); }
  bool empty() const { return steps() == 0; }
  // Every per-agent sequence has the same length.
  bool consistent() const;
  void Clear();
};

struct GaeResult {
  std::vector<std::vector<double>> advantages;  // raw, per agent
  std::vector<std::vector<double>> returns;     // advantages + values
  std::vector<std::vector<double>> normalized_advantages;
};

// advantage_t = sum_k (gamma*lambda)^k delta_{t+k},
// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t).
// Normalisation pools every agent of the buffer.
GaeResult ComputeGae(const RolloutBuffer& buffer, const PpoConfig& config);

// Pooled training batch; columns of `observations` are samples.
struct PpoBatch {
  Eigen::MatrixXd observations;
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

PpoBatch MakeBatch(const RolloutBuffer& buffer, const GaeResult& gae);

// min(r A, clip(r, 1-eps, 1+eps) A) and its derivative w.r.t. r.
double ClippedSurrogate(double ratio, double advantage, double clip);
double ClippedSurrogateGradient(double ratio, double advantage, double clip);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

struct PpoOptimizers {
  AdamState actor;
  AdamState critic;
};

PpoOptimizers MakeOptimizers(const SharedPolicy& policy, const PpoConfig& config);

// `epochs` full-batch passes of the clipped surrogate with entropy bonus and
// squared-error value loss; gradients are norm-clipped per network. Throws
// DivergenceError (leaving the policy at its last finite state) on non-finite
// losses or gradients.
PpoStats PpoUpdate(SharedPolicy& policy, PpoOptimizers& optimizers,
                   const PpoBatch& batch, const PpoConfig& config);

// Mean entropy of the policy over a batch of observations.
double MeanEntropy(const SharedPolicy& policy, const Eigen::MatrixXd& observations);

// Owns the policy, its optimizers and the shared rollout buffer.
class PpoTrainer {
 public:
  PpoTrainer(SharedPolicy policy, PpoConfig config, int n_agents);

  const SharedPolicy& policy() const { return policy_; }
  SharedPolicy& policy() { return policy_; }
  const PpoConfig& config() const { return config_; }
  RolloutBuffer& buffer() { return buffer_; }

  // GAE, update, then clears the buffer.
  PpoStats Update();

 private:
  SharedPolicy policy_;
  PpoConfig config_;
  PpoOptimizers optimizers_;
  RolloutBuffer buffer_;
};

// One episode played by the shared policy (or any per-agent action source).
struct EpisodeRollout {
  GridState initial;
  std::vector<GridState> states;  // post-step states, one per step
  std::vector<std::vector<Observation>> observations;  // [step][agent], pre-step
  std::vector<std::vector<Action>> actions;            // [step][agent]
  std::vector<std::vector<double>> log_probs;          // [step][agent]
  std::vector<std::vector<double>> values;             // [step][agent]
  std::vector<std::vector<double>> rewards;            // [step][agent], true

  int n_steps() const { return static_cast<int>(states.size()); }
  // Mean over steps of the mean per-agent true reward.
  double MeanStepReward() const;
};

EpisodeRollout CollectEpisode(const SharedPolicy& policy,
                              const ScenarioConfig& config, const InitMode& init,
                              ActMode mode, Rng& env_rng, Rng& policy_rng);

// Appends an episode to the buffer with the given per-step per-agent rewards.
void AppendEpisode(RolloutBuffer& buffer, const EpisodeRollout& episode,
                   const std::vector<std::vector<double>>& rewards);

}  // namespace swarmrecon

#endif  // SWARMRECON_PPO_H_
