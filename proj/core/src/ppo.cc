#include "swarmrecon/ppo.h"

#include <algorithm>
#include <cmath>

#include "swarmrecon/error.h"

namespace swarmrecon {

void PpoConfig::Validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(clip > 0.0)) throw ConfigError("clip must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw ConfigError("learning rates must be positive");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
}

namespace {

std::vector<int> Layers(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Eigen::VectorXd ToVector(const Observation& obs) {
  return Eigen::Map<const Eigen::VectorXd>(obs.data(),
                                           static_cast<Eigen::Index>(obs.size()));
}

}  // namespace

SharedPolicy MakeSharedPolicy(int observation_size, const PpoConfig& config,
                              Rng& rng) {
  config.Validate();
  SharedPolicy policy;
  policy.actor = Mlp::Create(Layers(observation_size, config.hidden, kNumActions),
                             Head::kSoftmax, rng);
  policy.critic =
      Mlp::Create(Layers(observation_size, config.hidden, 1), Head::kLinear, rng);
  return policy;
}

int SampleCategorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = Uniform01(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  // Rounding left u above the total mass: fall back to the last non-zero slot.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

int ArgMax(const Eigen::VectorXd& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

ActResult Act(const SharedPolicy& policy, const Observation& obs, ActMode mode,
              Rng& rng) {
  const Eigen::VectorXd x = ToVector(obs);
  const ForwardCache cache = policy.actor.ForwardBatch(x);
  const Eigen::VectorXd log_probs = LogSoftmax(cache.logits).col(0);
  const Eigen::VectorXd probs = log_probs.array().exp();
  const int a = mode == ActMode::kGreedy ? ArgMax(probs) : SampleCategorical(probs, rng);
  ActResult r;
  r.action = static_cast<Action>(a);
  r.log_prob = log_probs[a];
  r.value = policy.critic.Forward(x)[0];
  return r;
}

bool RolloutBuffer::consistent() const {
  for (const AgentRollout& a : agents) {
    const std::size_t n = a.rewards.size();
    if (a.observations.size() != n || a.actions.size() != n ||
        a.log_probs.size() != n || a.values.size() != n || a.dones.size() != n ||
        n != steps()) {
      return false;
    }
  }
  return true;
}

void RolloutBuffer::Clear() {
  for (AgentRollout& a : agents) a = AgentRollout{};
}

GaeResult ComputeGae(const RolloutBuffer& buffer, const PpoConfig& config) {
  if (buffer.empty()) throw PreconditionError("GAE on an empty rollout buffer");
  if (!buffer.consistent()) {
    throw PreconditionError("rollout buffer sequences have unequal lengths");
  }
  GaeResult out;
  const std::size_t n_agents = buffer.agents.size();
  out.advantages.resize(n_agents);
  out.returns.resize(n_agents);
  out.normalized_advantages.resize(n_agents);

  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_agents; ++i) {
    const AgentRollout& a = buffer.agents[i];
    const std::size_t t_max = a.rewards.size();
    std::vector<double>& adv = out.advantages[i];
    adv.assign(t_max, 0.0);
    double running = 0.0;
    for (std::size_t t = t_max; t-- > 0;) {
      const double next_value = t + 1 < t_max ? a.values[t + 1] : a.bootstrap_value;
      const double not_done = a.dones[t] ? 0.0 : 1.0;
      const double delta =
          a.rewards[t] + config.gamma * next_value * not_done - a.values[t];
      running = delta + config.gamma * config.gae_lambda * not_done * running;
      adv[t] = running;
    }
    out.returns[i].resize(t_max);
    for (std::size_t t = 0; t < t_max; ++t) {
      out.returns[i][t] = adv[t] + a.values[t];
      sum += adv[t];
      sum_sq += adv[t] * adv[t];
    }
    count += t_max;
  }
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
  const double std_dev = std::sqrt(var);
  for (std::size_t i = 0; i < n_agents; ++i) {
    out.normalized_advantages[i] = out.advantages[i];
    for (double& v : out.normalized_advantages[i]) {
      v = std_dev > 1e-8 ? (v - mean) / std_dev : v - mean;
    }
  }
  return out;
}

PpoBatch MakeBatch(const RolloutBuffer& buffer, const GaeResult& gae) {
  if (buffer.empty()) throw PreconditionError("batch from an empty buffer");
  const Eigen::Index obs_dim =
      static_cast<Eigen::Index>(buffer.agents.front().observations.front().size());
  const Eigen::Index n =
      static_cast<Eigen::Index>(buffer.steps() * buffer.agents.size());
  PpoBatch batch;
  batch.observations.resize(obs_dim, n);
  batch.actions.reserve(n);
  batch.old_log_probs.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < buffer.agents.size(); ++i) {
    const AgentRollout& a = buffer.agents[i];
    for (std::size_t t = 0; t < a.rewards.size(); ++t, ++k) {
      batch.observations.col(k) = ToVector(a.observations[t]);
      batch.actions.push_back(a.actions[t]);
      batch.old_log_probs[k] = a.log_probs[t];
      batch.advantages[k] = gae.normalized_advantages[i][t];
      batch.returns[k] = gae.returns[i][t];
    }
  }
  return batch;
}

double ClippedSurrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double ClippedSurrogateGradient(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  // Inside the band both branches coincide; outside it only the unclipped
  // branch depends on the ratio.
  return ratio * advantage <= clipped * advantage ? advantage : 0.0;
}

PpoOptimizers MakeOptimizers(const SharedPolicy& policy, const PpoConfig& config) {
  return {MakeAdam(policy.actor, config.actor_lr),
          MakeAdam(policy.critic, config.critic_lr)};
}

double MeanEntropy(const SharedPolicy& policy, const Eigen::MatrixXd& observations) {
  const Eigen::MatrixXd log_p = LogSoftmax(policy.actor.ForwardBatch(observations).logits);
  const Eigen::ArrayXXd p = log_p.array().exp();
  return -(p * log_p.array()).sum() / static_cast<double>(observations.cols());
}

PpoStats PpoUpdate(SharedPolicy& policy, PpoOptimizers& optimizers,
                   const PpoBatch& batch, const PpoConfig& config) {
  const Eigen::Index n = batch.observations.cols();
  if (n == 0) throw PreconditionError("empty PPO batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  PpoStats stats;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Actor.
    const ForwardCache cache = policy.actor.ForwardBatch(batch.observations);
    const Eigen::MatrixXd log_p = LogSoftmax(cache.logits);
    const Eigen::MatrixXd p = log_p.array().exp();
    Eigen::MatrixXd logit_grad(kNumActions, n);
    double surrogate = 0.0;
    double entropy = 0.0;
    double kl = 0.0;
    double clipped = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const int a = batch.actions[k];
      const double log_ratio = log_p(a, k) - batch.old_log_probs[k];
      const double ratio = std::exp(log_ratio);
      const double adv = batch.advantages[k];
      surrogate += ClippedSurrogate(ratio, adv, config.clip);
      const double d_ratio = ClippedSurrogateGradient(ratio, adv, config.clip);
      const double h = -(p.col(k).array() * log_p.col(k).array()).sum();
      entropy += h;
      kl += (ratio - 1.0) - log_ratio;
      if (std::abs(ratio - 1.0) > config.clip) clipped += 1.0;
      // d(-surrogate)/dz = -d_ratio * ratio * (onehot(a) - p)
      // d(-coef * H)/dz_j = coef * p_j (log p_j + H)
      for (int j = 0; j < kNumActions; ++j) {
        const double onehot = j == a ? 1.0 : 0.0;
        logit_grad(j, k) = inv_n * (-d_ratio * ratio * (onehot - p(j, k)) +
                                    config.entropy_coef * p(j, k) * (log_p(j, k) + h));
      }
    }
    stats.policy_loss = -surrogate * inv_n;
    stats.entropy = entropy * inv_n;
    stats.approx_kl = kl * inv_n;
    stats.clip_fraction = clipped * inv_n;
    const double actor_loss = stats.policy_loss - config.entropy_coef * stats.entropy;

    // Critic.
    const ForwardCache vcache = policy.critic.ForwardBatch(batch.observations);
    const Eigen::RowVectorXd diff = vcache.output.row(0) - batch.returns.transpose();
    stats.value_loss = config.value_coef * diff.squaredNorm() * inv_n;
    const Eigen::MatrixXd value_grad = (2.0 * config.value_coef * inv_n) * diff;

    if (!std::isfinite(actor_loss) || !std::isfinite(stats.value_loss)) {
      throw DivergenceError("non-finite PPO loss");
    }
    Eigen::VectorXd g_actor = policy.actor.BackwardLogits(cache, logit_grad);
    Eigen::VectorXd g_critic = policy.critic.BackwardLogits(vcache, value_grad);
    if (!g_actor.allFinite() || !g_critic.allFinite()) {
      throw DivergenceError("non-finite PPO gradient");
    }
    ClipGradNorm(g_actor, config.max_grad_norm);
    ClipGradNorm(g_critic, config.max_grad_norm);
    AdamStep(policy.actor, g_actor, optimizers.actor);
    AdamStep(policy.critic, g_critic, optimizers.critic);
  }
  return stats;
}

PpoTrainer::PpoTrainer(SharedPolicy policy, PpoConfig config, int n_agents)
    : policy_(std::move(policy)),
      config_(std::move(config)),
      optimizers_(MakeOptimizers(policy_, config_)),
      buffer_(n_agents) {
  config_.Validate();
}

PpoStats PpoTrainer::Update() {
  const GaeResult gae = ComputeGae(buffer_, config_);
  const PpoBatch batch = MakeBatch(buffer_, gae);
  buffer_.Clear();
  return PpoUpdate(policy_, optimizers_, batch, config_);
}

double EpisodeRollout::MeanStepReward() const {
  if (rewards.empty()) return 0.0;
  double total = 0.0;
  for (const auto& step : rewards) {
    double s = 0.0;
    for (double r : step) s += r;
    total += s / static_cast<double>(step.size());
  }
  return total / static_cast<double>(rewards.size());
}

EpisodeRollout CollectEpisode(const SharedPolicy& policy,
                              const ScenarioConfig& config, const InitMode& init,
                              ActMode mode, Rng& env_rng, Rng& policy_rng) {
  EpisodeRollout ep;
  ep.initial = Reset(config, init, env_rng);
  const int n = config.n_agents;
  ep.states.reserve(config.episode_length);
  GridState state = ep.initial;
  std::vector<Action> joint(n);
  for (int t = 0; t < config.episode_length; ++t) {
    std::vector<Observation> obs(n);
    std::vector<double> logp(n), vals(n);
    for (int i = 0; i < n; ++i) {
      obs[i] = Observe(state, i, config);
      const ActResult r = Act(policy, obs[i], mode, policy_rng);
      joint[i] = r.action;
      logp[i] = r.log_prob;
      vals[i] = r.value;
    }
    StepResult step = Step(state, joint, config);
    ep.observations.push_back(std::move(obs));
    ep.actions.push_back(joint);
    ep.log_probs.push_back(std::move(logp));
    ep.values.push_back(std::move(vals));
    ep.rewards.push_back(std::move(step.rewards));
    state = step.next_state;
    ep.states.push_back(state);
  }
  return ep;
}

void AppendEpisode(RolloutBuffer& buffer, const EpisodeRollout& episode,
                   const std::vector<std::vector<double>>& rewards) {
  const int steps = episode.n_steps();
  if (static_cast<int>(rewards.size()) != steps) {
    throw PreconditionError("reward sequence length differs from the episode");
  }
  for (std::size_t i = 0; i < buffer.agents.size(); ++i) {
    AgentRollout& a = buffer.agents[i];
    for (int t = 0; t < steps; ++t) {
      const double r = rewards[t][i];
      if (!std::isfinite(r)) throw DivergenceError("non-finite reward in rollout");
      a.observations.push_back(episode.observations[t][i]);
      a.actions.push_back(static_cast<int>(episode.actions[t][i]));
      a.log_probs.push_back(episode.log_probs[t][i]);
      a.values.push_back(episode.values[t][i]);
      a.rewards.push_back(r);
      a.dones.push_back(t + 1 == steps);
    }
  }
}

}  // namespace swarmrecon
