#include "swarmrecon/baselines.h"

#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>

#include "swarmrecon/error.h"
#include "swarmrecon/parallel.h"

namespace swarmrecon {

namespace {

Eigen::VectorXd ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Mean cross-entropy of `labels` under the softmax of `net` on `x`.
double CrossEntropy(const Mlp& net, const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  if (x.cols() == 0) return 0.0;
  const Eigen::MatrixXd log_p = LogSoftmax(net.ForwardBatch(x).logits);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) loss -= log_p(labels[k], k);
  return loss / static_cast<double>(x.cols());
}

}  // namespace

BcResult TrainBc(const DemoPool& demos, const ScenarioConfig& config, const BcConfig& bc,
                 std::uint64_t seed, int jobs) {
  config.Validate();
  if (demos.trajectories.empty()) throw PreconditionError("behaviour cloning needs demonstrations");
  CheckDemos(config, demos);
  if (bc.epochs < 1 || bc.batch_size < 1) throw ConfigError("BC epochs and batch size must be >= 1");
  if (!(bc.validation_fraction >= 0.0 && bc.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  const int n = config.n_agents;
  const int obs_dim = ObservationSize(config);
  BcResult result;
  result.model.networks.resize(n);
  result.stats.resize(n);

  ParallelFor(static_cast<std::size_t>(n), jobs, [&](std::size_t agent) {
    // Gather this agent's (observation, action) pairs.
    std::vector<const Observation*> obs;
    std::vector<int> actions;
    for (const Trajectory& t : demos.trajectories) {
      for (const StepRecord& s : t.steps) {
        obs.push_back(&s.observations[agent]);
        actions.push_back(static_cast<int>(s.actions[agent]));
      }
    }
    const std::size_t total = obs.size();
    Rng rng = MakeRng(seed, "bc", agent);
    Rng init_rng = MakeRng(seed, "bc-init", agent);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = total - 1; i > 0; --i) std::swap(order[i], order[UniformIndex(rng, i + 1)]);
    const auto n_val = static_cast<std::size_t>(std::floor(bc.validation_fraction * total));
    const std::size_t n_train = total - n_val;

    Eigen::MatrixXd x_train(obs_dim, n_train), x_val(obs_dim, n_val);
    std::vector<int> y_train(n_train), y_val(n_val);
    for (std::size_t k = 0; k < total; ++k) {
      const std::size_t src = order[k];
      if (k < n_train) {
        x_train.col(k) = ToVector(*obs[src]);
        y_train[k] = actions[src];
      } else {
        x_val.col(k - n_train) = ToVector(*obs[src]);
        y_val[k - n_train] = actions[src];
      }
    }

    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), bc.hidden.begin(), bc.hidden.end());
    sizes.push_back(kNumActions);
    Mlp net = Mlp::Create(sizes, Head::kSoftmax, init_rng);
    AdamState opt = MakeAdam(net, bc.learning_rate);

    auto selection_loss = [&](const Mlp& m) {
      return n_val > 0 ? CrossEntropy(m, x_val, y_val) : CrossEntropy(m, x_train, y_train);
    };
    BcAgentStats stats;
    stats.train_samples = static_cast<int>(n_train);
    stats.validation_samples = static_cast<int>(n_val);
    stats.initial_validation_loss = selection_loss(net);
    stats.best_validation_loss = stats.initial_validation_loss;
    Mlp best = net;

    std::vector<std::size_t> idx(n_train);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t batch = static_cast<std::size_t>(bc.batch_size);
    for (int epoch = 1; epoch <= bc.epochs; ++epoch) {
      for (std::size_t i = n_train - 1; i > 0; --i) std::swap(idx[i], idx[UniformIndex(rng, i + 1)]);
      for (std::size_t start = 0; start < n_train; start += batch) {
        const std::size_t nb = std::min(batch, n_train - start);
        Eigen::MatrixXd xb(obs_dim, nb);
        for (std::size_t k = 0; k < nb; ++k) xb.col(k) = x_train.col(idx[start + k]);
        const ForwardCache cache = net.ForwardBatch(xb);
        Eigen::MatrixXd g = cache.output;
        for (std::size_t k = 0; k < nb; ++k) g(y_train[idx[start + k]], k) -= 1.0;
        g /= static_cast<double>(nb);
        AdamStep(net, net.BackwardLogits(cache, g), opt);
      }
      const double loss = selection_loss(net);
      if (!std::isfinite(loss)) throw DivergenceError("non-finite BC loss");
      if (loss < stats.best_validation_loss) {
        stats.best_validation_loss = loss;
        stats.best_epoch = epoch;
        best = net;
      }
    }
    result.model.networks[agent] = std::move(best);
    result.stats[agent] = stats;
  });
  return result;
}

ActResult ActBc(const BcModel& model, int agent_index, const Observation& obs,
                ActMode mode, Rng& rng) {
  if (agent_index < 0 || agent_index >= static_cast<int>(model.networks.size())) {
    throw PreconditionError("agent index " + std::to_string(agent_index) +
                            " has no BC network");
  }
  const Mlp& net = model.networks[agent_index];
  const Eigen::VectorXd log_p = LogSoftmax(net.ForwardBatch(ToVector(obs)).logits).col(0);
  const Eigen::VectorXd p = log_p.array().exp();
  const int a = mode == ActMode::kGreedy ? ArgMax(p) : SampleCategorical(p, rng);
  return {static_cast<Action>(a), log_p[a], 0.0};
}

double AirlLogit(const Mlp& reward_net, const FeatureVector& feature_with_action,
                 double log_pi) {
  return reward_net.Forward(ToVector(feature_with_action))[0] - log_pi;
}

double AirlRewardFromDiscriminator(const Mlp& reward_net,
                                   const FeatureVector& feature_with_action,
                                   double log_pi) {
  const double d = Sigmoid(AirlLogit(reward_net, feature_with_action, log_pi));
  return std::log(d) - std::log1p(-d);
}

namespace {

// (feature ++ one-hot action) of the acting state, raw observation, action.
struct AirlSamples {
  Eigen::MatrixXd features;
  Eigen::MatrixXd observations;
  std::vector<int> actions;
};

AirlSamples Concatenate(const std::deque<AirlSamples>& parts) {
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p.features.cols();
  AirlSamples out;
  out.features.resize(parts.front().features.rows(), cols);
  out.observations.resize(parts.front().observations.rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.features.middleCols(at, p.features.cols()) = p.features;
    out.observations.middleCols(at, p.observations.cols()) = p.observations;
    out.actions.insert(out.actions.end(), p.actions.begin(), p.actions.end());
    at += p.features.cols();
  }
  return out;
}

AirlSamples SamplesFromTrajectories(const std::vector<Trajectory>& trajectories,
                                    const ScenarioConfig& config) {
  const int n = config.n_agents;
  std::size_t total = 0;
  for (const auto& t : trajectories) total += t.steps.size() * n;
  AirlSamples s;
  s.features.resize(FeatureSize(config) + kNumActions, static_cast<Eigen::Index>(total));
  s.observations.resize(ObservationSize(config), static_cast<Eigen::Index>(total));
  s.actions.reserve(total);
  Eigen::Index k = 0;
  for (const auto& t : trajectories) {
    GridState state = t.initial;
    for (const StepRecord& rec : t.steps) {
      for (int a = 0; a < n; ++a, ++k) {
        s.features.col(k) = ToVector(TransformWithAction(state, a, rec.actions[a], config));
        s.observations.col(k) = ToVector(rec.observations[a]);
        s.actions.push_back(static_cast<int>(rec.actions[a]));
      }
      state.agents = rec.positions;
      ++state.timestep;
    }
  }
  return s;
}

Eigen::RowVectorXd PolicyLogProbs(const SharedPolicy& policy, const Eigen::MatrixXd& obs,
                                  const std::vector<int>& actions,
                                  const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd x(obs.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(k) = obs.col(cols[k]);
  const Eigen::MatrixXd log_p = LogSoftmax(policy.actor.ForwardBatch(x).logits);
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out[k] = log_p(actions[cols[k]], k);
  return out;
}

struct AirlTrainStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

AirlTrainStats TrainAirlDiscriminator(Mlp& reward_net, AdamState& opt,
                                      const SharedPolicy& policy,
                                      const AirlSamples& learner,
                                      const AirlSamples& expert, int epochs,
                                      int batch_size, Rng& rng) {
  const Eigen::Index half = std::max(1, batch_size / 2);
  const Eigen::Index n_learner = learner.features.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_learner));
  std::iota(order.begin(), order.end(), 0);
  AirlTrainStats stats;
  double loss_sum = 0.0;
  double correct = 0.0;
  double seen = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (Eigen::Index i = n_learner - 1; i > 0; --i) {
      std::swap(order[i], order[UniformIndex(rng, static_cast<std::uint64_t>(i) + 1)]);
    }
    const bool last_epoch = epoch + 1 == epochs;
    for (Eigen::Index start = 0; start < n_learner; start += half) {
      const Eigen::Index nl = std::min(half, n_learner - start);
      std::vector<Eigen::Index> lcols(order.begin() + start, order.begin() + start + nl);
      std::vector<Eigen::Index> ecols(static_cast<std::size_t>(nl));
      for (auto& c : ecols) {
        c = static_cast<Eigen::Index>(
            UniformIndex(rng, static_cast<std::uint64_t>(expert.features.cols())));
      }
      Eigen::MatrixXd x(learner.features.rows(), 2 * nl);
      for (Eigen::Index k = 0; k < nl; ++k) {
        x.col(k) = expert.features.col(ecols[k]);
        x.col(nl + k) = learner.features.col(lcols[k]);
      }
      Eigen::RowVectorXd log_pi(2 * nl);
      log_pi << PolicyLogProbs(policy, expert.observations, expert.actions, ecols),
          PolicyLogProbs(policy, learner.observations, learner.actions, lcols);
      const ForwardCache cache = reward_net.ForwardBatch(x);
      Eigen::MatrixXd grad(1, 2 * nl);
      for (Eigen::Index k = 0; k < 2 * nl; ++k) {
        const double label = k < nl ? 1.0 : 0.0;
        const double z = cache.logits(0, k) - log_pi[k];
        const double d = Sigmoid(z);
        grad(0, k) = (d - label) / static_cast<double>(2 * nl);
        if (last_epoch) {
          const double p = ClampProbability(d);
          loss_sum -= label > 0.5 ? std::log(p) : std::log1p(-p);
          correct += (d > 0.5) == (label > 0.5) ? 1.0 : 0.0;
          seen += 1.0;
        }
      }
      AdamStep(reward_net, reward_net.BackwardLogits(cache, grad), opt);
    }
  }
  stats.loss = seen > 0 ? loss_sum / seen : 0.0;
  stats.accuracy = seen > 0 ? correct / seen : 0.0;
  return stats;
}

}  // namespace

AirlResult TrainAirl(const ScenarioConfig& config, const DemoPool& demos,
                     const GailSchedule& schedule, const PpoConfig& ppo,
                     const DiscriminatorConfig& disc, std::uint64_t seed,
                     const AirlProgressFn& progress) {
  config.Validate();
  CheckDemos(config, demos);
  schedule.Validate();
  ppo.Validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = config.n_agents;

  Rng init_rng = MakeRng(seed, "policy-init");
  Rng disc_init_rng = MakeRng(seed, "disc-init");
  Rng env_rng = MakeRng(seed, "env");
  Rng policy_rng = MakeRng(seed, "policy");

  PpoTrainer trainer(MakeSharedPolicy(ObservationSize(config), ppo, init_rng), ppo, n);
  std::vector<int> sizes{FeatureSize(config) + kNumActions};
  sizes.insert(sizes.end(), disc.hidden.begin(), disc.hidden.end());
  sizes.push_back(1);
  AirlResult result;
  result.model.reward_net = Mlp::Create(sizes, Head::kLinear, disc_init_rng);
  AdamState opt = MakeAdam(result.model.reward_net, disc.learning_rate);

  const AirlSamples expert = SamplesFromTrajectories(demos.trajectories, config);
  std::deque<AirlSamples> learner_buffer;
  AirlTrainStats last;
  const InitMode init = UniformRandom{};

  for (int episode = 1; episode <= schedule.total_episodes; ++episode) {
    const EpisodeRollout ep = CollectEpisode(trainer.policy(), config, init,
                                             ActMode::kSample, env_rng, policy_rng);
    AirlSamples samples;
    const Eigen::Index count = static_cast<Eigen::Index>(ep.n_steps()) * n;
    samples.features.resize(FeatureSize(config) + kNumActions, count);
    samples.observations.resize(ObservationSize(config), count);
    Eigen::Index k = 0;
    for (int t = 0; t < ep.n_steps(); ++t) {
      const GridState& pre = t == 0 ? ep.initial : ep.states[t - 1];
      for (int a = 0; a < n; ++a, ++k) {
        samples.features.col(k) = ToVector(TransformWithAction(pre, a, ep.actions[t][a], config));
        samples.observations.col(k) = ToVector(ep.observations[t][a]);
        samples.actions.push_back(static_cast<int>(ep.actions[t][a]));
      }
    }
    learner_buffer.push_back(samples);
    while (static_cast<int>(learner_buffer.size()) > schedule.learner_buffer_episodes) {
      learner_buffer.pop_front();
    }

    AirlLogRow row;
    row.episode = episode;
    if (schedule.IsUpdateEpisode(episode)) {
      row.disc_updated = true;
      Rng rng = MakeRng(seed, "disc-train", static_cast<std::uint64_t>(episode));
      last = TrainAirlDiscriminator(result.model.reward_net, opt, trainer.policy(),
                                    Concatenate(learner_buffer), expert,
                                    schedule.disc_epochs_per_update,
                                    schedule.disc_batch_size, rng);
    }

    // r = g(f, a) - log pi(a | o) with the rollout-time log-probabilities.
    const Eigen::RowVectorXd g =
        result.model.reward_net.ForwardBatch(samples.features).output.row(0);
    std::vector<std::vector<double>> rewards(ep.n_steps(), std::vector<double>(n));
    k = 0;
    double mean_reward = 0.0;
    for (int t = 0; t < ep.n_steps(); ++t) {
      for (int a = 0; a < n; ++a, ++k) {
        rewards[t][a] = g[k] - ep.log_probs[t][a];
        mean_reward += rewards[t][a] / static_cast<double>(count);
      }
    }
    AppendEpisode(trainer.buffer(), ep, rewards);
    trainer.Update();

    row.disc_reward_mean = mean_reward;
    row.true_reward_mean = ep.MeanStepReward();
    row.disc_loss = last.loss;
    row.disc_accuracy = last.accuracy;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(row);
    result.log.push_back(row);
  }
  result.model.policy = trainer.policy();
  return result;
}

void WriteAirlCsv(std::ostream& out, const std::vector<AirlLogRow>& log) {
  out << "episode,disc_reward,true_reward,disc_updated,disc_loss,disc_accuracy,wall_seconds\n";
  const auto old = out.precision(10);
  for (const AirlLogRow& r : log) {
    out << r.episode << ',' << r.disc_reward_mean << ',' << r.true_reward_mean << ','
        << (r.disc_updated ? 1 : 0) << ',' << r.disc_loss << ',' << r.disc_accuracy << ','
        << r.wall_seconds << '\n';
  }
  out.precision(old);
}

}  // namespace swarmrecon
