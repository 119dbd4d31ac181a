#include "swarmrecon/magail.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>

#include "swarmrecon/error.h"
#include "swarmrecon/parallel.h"

namespace swarmrecon {

std::string_view RewardModeName(RewardMode mode) {
  switch (mode) {
    case RewardMode::kAlgorithmOne:
      return "algorithm_one";
    case RewardMode::kLogD:
      return "log_d";
    case RewardMode::kNegLogOneMinusD:
      return "neg_log_one_minus_d";
  }
  return "unknown";
}

std::optional<RewardMode> ParseRewardMode(std::string_view name) {
  if (name == "algorithm_one") return RewardMode::kAlgorithmOne;
  if (name == "log_d") return RewardMode::kLogD;
  if (name == "neg_log_one_minus_d") return RewardMode::kNegLogOneMinusD;
  return std::nullopt;
}

double ClampProbability(double d) {
  if (std::isnan(d)) throw DivergenceError("discriminator produced NaN");
  return std::clamp(d, kProbClamp, 1.0 - kProbClamp);
}

void GailSchedule::Validate() const {
  if (init_episode < 1) throw ConfigError("init_episode must be >= 1");
  if (early_interval < 1 || late_interval < 1)
    throw ConfigError("discriminator intervals must be >= 1");
  if (init_episode > early_until) throw ConfigError("schedule requires init_episode <= early_until");
  if (total_episodes < 1) throw ConfigError("total_episodes must be >= 1");
  if (disc_epochs_per_update < 1) throw ConfigError("disc_epochs_per_update must be >= 1");
  if (disc_batch_size < 2) throw ConfigError("disc_batch_size must be >= 2");
  if (learner_buffer_episodes < 1) throw ConfigError("learner_buffer_episodes must be >= 1");
}

bool GailSchedule::IsUpdateEpisode(int episode) const {
  if (episode < init_episode || episode > total_episodes) return false;
  if (episode == init_episode) return true;
  if (episode <= early_until) return episode % early_interval == 0;
  return episode % late_interval == 0;
}

std::vector<int> GailSchedule::UpdateEpisodes() const {
  std::vector<int> out;
  for (int e = 1; e <= total_episodes; ++e) {
    if (IsUpdateEpisode(e)) out.push_back(e);
  }
  return out;
}

DiscriminatorBank MakeDiscriminatorBank(int n_agents, int feature_size,
                                        const DiscriminatorConfig& config, Rng& rng) {
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("discriminator learning rate must be positive");
  }
  std::vector<int> sizes{feature_size};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  DiscriminatorBank bank;
  for (int n = 0; n < n_agents; ++n) {
    bank.discriminators.push_back(Mlp::Create(sizes, Head::kSigmoid, rng));
    bank.optimizers.push_back(MakeAdam(bank.discriminators.back(), config.learning_rate));
  }
  return bank;
}

double DiscriminatorLoss(std::span<const double> disc_output_expert,
                         std::span<const double> disc_output_learner) {
  if (disc_output_expert.empty() || disc_output_learner.empty()) {
    throw PreconditionError("discriminator loss needs both classes");
  }
  double learner_term = 0.0;
  for (double d : disc_output_learner) learner_term += std::log(ClampProbability(d));
  double expert_term = 0.0;
  for (double d : disc_output_expert) expert_term += std::log1p(-ClampProbability(d));
  return -(learner_term / static_cast<double>(disc_output_learner.size()) +
           expert_term / static_cast<double>(disc_output_expert.size()));
}

double RewardFromProbability(double d, RewardMode mode) {
  const double p = ClampProbability(d);
  switch (mode) {
    case RewardMode::kAlgorithmOne:
      return std::log(p) + std::log1p(-p);
    case RewardMode::kLogD:
      return std::log(p);
    case RewardMode::kNegLogOneMinusD:
      return -std::log1p(-p);
  }
  return 0.0;
}

double LearnerReward(const Mlp& disc, const FeatureVector& feature, RewardMode mode) {
  if (static_cast<int>(feature.size()) != disc.input_size()) {
    throw PreconditionError("feature dimension does not match the discriminator");
  }
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      feature.data(), static_cast<Eigen::Index>(feature.size()));
  return RewardFromProbability(disc.Forward(x)[0], mode);
}

FeatureMatrix ToMatrix(const std::vector<FeatureVector>& features) {
  if (features.empty()) return {};
  FeatureMatrix m(static_cast<Eigen::Index>(features.front().size()),
                  static_cast<Eigen::Index>(features.size()));
  for (std::size_t k = 0; k < features.size(); ++k) {
    m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(
        features[k].data(), static_cast<Eigen::Index>(features[k].size()));
  }
  return m;
}

FeatureMatrix PooledExpertFeatures(const DemoPool& demos) {
  const FeatureDataset dataset =
      TransformTrajectories(demos.trajectories, demos.config, SourceTag::kExpert);
  FeatureMatrix m(static_cast<Eigen::Index>(dataset.dimension()),
                  static_cast<Eigen::Index>(dataset.rows.size()));
  for (std::size_t k = 0; k < dataset.rows.size(); ++k) {
    const auto& v = dataset.rows[k].values;
    m.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return m;
}

double DiscriminatorAccuracy(const Mlp& disc, const FeatureMatrix& learner,
                             const FeatureMatrix& expert, bool swap_convention) {
  const Eigen::RowVectorXd dl = disc.ForwardBatch(learner).output.row(0);
  const Eigen::RowVectorXd de = disc.ForwardBatch(expert).output.row(0);
  const double learner_high = (dl.array() > 0.5).cast<double>().sum();
  const double expert_low = (de.array() < 0.5).cast<double>().sum();
  const double correct = swap_convention
                             ? (dl.size() - learner_high) + (de.size() - expert_low)
                             : learner_high + expert_low;
  return correct / static_cast<double>(dl.size() + de.size());
}

DiscriminatorTrainStats TrainDiscriminator(Mlp& disc, AdamState& optimizer,
                                           const FeatureMatrix& learner,
                                           const FeatureMatrix& expert, int epochs,
                                           int batch_size, bool swap_convention,
                                           Rng& rng) {
  if (learner.cols() == 0 || expert.cols() == 0) {
    throw PreconditionError("discriminator training needs learner and expert features");
  }
  if (learner.rows() != disc.input_size() || expert.rows() != disc.input_size()) {
    throw PreconditionError("feature dimension does not match the discriminator");
  }
  const double learner_label = swap_convention ? 0.0 : 1.0;
  const double expert_label = 1.0 - learner_label;
  const Eigen::Index half = std::max(1, batch_size / 2);
  const Eigen::Index n_learner = learner.cols();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_learner));
  std::iota(order.begin(), order.end(), 0);
  DiscriminatorTrainStats stats;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (Eigen::Index i = n_learner - 1; i > 0; --i) {
      std::swap(order[i], order[UniformIndex(rng, static_cast<std::uint64_t>(i) + 1)]);
    }
    for (Eigen::Index start = 0; start < n_learner; start += half) {
      const Eigen::Index nl = std::min(half, n_learner - start);
      const Eigen::Index nb = 2 * nl;
      Eigen::MatrixXd x(disc.input_size(), nb);
      Eigen::VectorXd y(nb);
      for (Eigen::Index k = 0; k < nl; ++k) {
        x.col(k) = learner.col(order[start + k]);
        y[k] = learner_label;
        x.col(nl + k) = expert.col(static_cast<Eigen::Index>(
            UniformIndex(rng, static_cast<std::uint64_t>(expert.cols()))));
        y[nl + k] = expert_label;
      }
      const ForwardCache cache = disc.ForwardBatch(x);
      // d/dz of binary cross-entropy with logits, averaged over the batch.
      Eigen::MatrixXd g = (cache.output.row(0).transpose() - y).transpose() /
                          static_cast<double>(nb);
      AdamStep(disc, disc.BackwardLogits(cache, g), optimizer);
      ++stats.steps;
    }
  }

  // Report on the whole learner set against an equally sized expert sample.
  Eigen::MatrixXd expert_sample(expert.rows(), n_learner);
  for (Eigen::Index k = 0; k < n_learner; ++k) {
    expert_sample.col(k) = expert.col(static_cast<Eigen::Index>(
        UniformIndex(rng, static_cast<std::uint64_t>(expert.cols()))));
  }
  const Eigen::RowVectorXd dl = disc.ForwardBatch(learner).output.row(0);
  const Eigen::RowVectorXd de = disc.ForwardBatch(expert_sample).output.row(0);
  const std::vector<double> vl(dl.data(), dl.data() + dl.size());
  const std::vector<double> ve(de.data(), de.data() + de.size());
  stats.loss = swap_convention ? DiscriminatorLoss(vl, ve) : DiscriminatorLoss(ve, vl);
  stats.accuracy = DiscriminatorAccuracy(disc, learner, expert_sample, swap_convention);
  return stats;
}

void CheckDemos(const ScenarioConfig& config, const DemoPool& demos) {
  if (demos.trajectories.empty()) throw PreconditionError("no demonstrations given");
  if (demos.config.kind != config.kind ||
      demos.config.fixed_entities != config.fixed_entities ||
      demos.config.n_agents != config.n_agents ||
      demos.config.grid_size != config.grid_size) {
    throw PreconditionError("demonstrations were recorded in a different scenario");
  }
  for (const Trajectory& t : demos.trajectories) {
    if (t.kind != config.kind) {
      throw PreconditionError("demonstration pool mixes scenarios");
    }
  }
}

namespace {

FeatureMatrix EpisodeFeatures(const EpisodeRollout& ep, int agent,
                              const ScenarioConfig& config) {
  FeatureMatrix m(FeatureSize(config), ep.n_steps());
  for (int t = 0; t < ep.n_steps(); ++t) {
    const FeatureVector f = Transform(ep.states[t], agent, config);
    m.col(t) = Eigen::Map<const Eigen::VectorXd>(f.data(),
                                                 static_cast<Eigen::Index>(f.size()));
  }
  return m;
}

FeatureMatrix Concatenate(const std::deque<FeatureMatrix>& parts) {
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p.cols();
  FeatureMatrix out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

}  // namespace

MagailResult TrainMagail(const ScenarioConfig& config, const DemoPool& demos,
                         const GailSchedule& schedule, const PpoConfig& ppo,
                         const MagailOptions& options, std::uint64_t seed,
                         const MagailProgressFn& progress) {
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
  MagailResult result;
  result.bank = MakeDiscriminatorBank(n, FeatureSize(config), options.discriminator,
                                      disc_init_rng);
  const FeatureMatrix expert = PooledExpertFeatures(demos);

  std::vector<std::deque<FeatureMatrix>> learner_buffer(n);
  std::vector<double> last_loss(n, 0.0), last_acc(n, 0.0);
  const InitMode init = UniformRandom{};

  for (int episode = 1; episode <= schedule.total_episodes; ++episode) {
    const EpisodeRollout ep = CollectEpisode(trainer.policy(), config, init,
                                             ActMode::kSample, env_rng, policy_rng);
    std::vector<FeatureMatrix> features(n);
    for (int a = 0; a < n; ++a) {
      features[a] = EpisodeFeatures(ep, a, config);
      learner_buffer[a].push_back(features[a]);
      while (static_cast<int>(learner_buffer[a].size()) > schedule.learner_buffer_episodes) {
        learner_buffer[a].pop_front();
      }
    }

    MagailLogRow row;
    row.episode = episode;
    if (schedule.IsUpdateEpisode(episode)) {
      row.disc_updated = true;
      ParallelFor(static_cast<std::size_t>(n), options.jobs, [&](std::size_t a) {
        const FeatureMatrix learner = Concatenate(learner_buffer[a]);
        if (options.on_disc_update) options.on_disc_update(static_cast<int>(a), expert, learner);
        Rng rng = MakeRng(seed, "disc-train",
                          static_cast<std::uint64_t>(episode) * n + a);
        const DiscriminatorTrainStats s = TrainDiscriminator(
            result.bank.discriminators[a], result.bank.optimizers[a], learner, expert,
            schedule.disc_epochs_per_update, schedule.disc_batch_size,
            options.swap_convention, rng);
        last_loss[a] = s.loss;
        last_acc[a] = s.accuracy;
      });
    }

    // Rewards from the (possibly just updated) discriminators.
    std::vector<std::vector<double>> rewards(ep.n_steps(), std::vector<double>(n));
    row.disc_reward_mean.assign(n, 0.0);
    double disc_out = 0.0;
    for (int a = 0; a < n; ++a) {
      const Eigen::RowVectorXd d =
          result.bank.discriminators[a].ForwardBatch(features[a]).output.row(0);
      for (int t = 0; t < ep.n_steps(); ++t) {
        const double r = RewardFromProbability(d[t], options.reward_mode);
        rewards[t][a] = r;
        row.disc_reward_mean[a] += r / ep.n_steps();
      }
      disc_out += d.mean() / n;
    }
    AppendEpisode(trainer.buffer(), ep, rewards);
    trainer.Update();

    row.true_reward_mean = ep.MeanStepReward();
    row.disc_output_mean = disc_out;
    row.disc_loss = last_loss;
    row.disc_accuracy = last_acc;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(row);
    result.log.push_back(std::move(row));
  }
  result.policy = trainer.policy();
  return result;
}

void WriteMagailCsv(std::ostream& out, const std::vector<MagailLogRow>& log) {
  const std::size_t n = log.empty() ? 0 : log.front().disc_reward_mean.size();
  out << "episode";
  for (std::size_t a = 0; a < n; ++a) out << ",disc_reward_" << a;
  out << ",true_reward,disc_output_mean,disc_updated";
  for (std::size_t a = 0; a < n; ++a) out << ",disc_loss_" << a << ",disc_accuracy_" << a;
  out << ",wall_seconds\n";
  const auto old = out.precision(10);
  for (const MagailLogRow& r : log) {
    out << r.episode;
    for (double v : r.disc_reward_mean) out << ',' << v;
    out << ',' << r.true_reward_mean << ',' << r.disc_output_mean << ','
        << (r.disc_updated ? 1 : 0);
    for (std::size_t a = 0; a < n; ++a) out << ',' << r.disc_loss[a] << ',' << r.disc_accuracy[a];
    out << ',' << r.wall_seconds << '\n';
  }
  out.precision(old);
}

}  // namespace swarmrecon
