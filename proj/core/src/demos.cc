#include "swarmrecon/demos.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "json_io.h"
#include "swarmrecon/parallel.h"

namespace swarmrecon {

using internal::json;

std::vector<GridState> Trajectory::States() const {
  std::vector<GridState> out;
  out.reserve(steps.size());
  GridState s = initial;
  for (const StepRecord& step : steps) {
    s.agents = step.positions;
    ++s.timestep;
    out.push_back(s);
  }
  return out;
}

double Trajectory::MeanStepReward() const {
  if (steps.empty()) return 0.0;
  double total = 0.0;
  for (const StepRecord& s : steps) {
    total += std::accumulate(s.rewards.begin(), s.rewards.end(), 0.0) /
             static_cast<double>(s.rewards.size());
  }
  return total / static_cast<double>(steps.size());
}

Trajectory MakeTrajectory(const EpisodeRollout& episode, ScenarioKind kind,
                          std::uint64_t seed) {
  Trajectory t;
  t.kind = kind;
  t.seed = seed;
  t.initial = episode.initial;
  t.steps.reserve(episode.n_steps());
  for (int k = 0; k < episode.n_steps(); ++k) {
    t.steps.push_back({episode.states[k].agents, episode.observations[k],
                       episode.actions[k], episode.rewards[k]});
  }
  return t;
}

void ValidateTrajectory(const Trajectory& trajectory, const ScenarioConfig& config) {
  auto fail = [&](std::size_t step, const std::string& what) {
    throw FormatError("trajectory (seed " + std::to_string(trajectory.seed) +
                      ") step " + std::to_string(step) + ": " + what);
  };
  if (trajectory.kind != config.kind) fail(0, "scenario kind mismatch");
  if (trajectory.initial.fixed_entities != config.fixed_entities) {
    fail(0, "fixed entities differ from the scenario configuration");
  }
  if (static_cast<int>(trajectory.initial.agents.size()) != config.n_agents ||
      trajectory.initial.timestep != 0) {
    fail(0, "malformed initial state");
  }
  for (const Cell& c : trajectory.initial.agents) {
    if (!InsideGrid(c, config.grid_size)) fail(0, "initial position outside grid");
  }
  if (static_cast<int>(trajectory.steps.size()) != config.episode_length) {
    fail(trajectory.steps.size(), "step count differs from episode_length");
  }
  GridState state = trajectory.initial;
  for (std::size_t k = 0; k < trajectory.steps.size(); ++k) {
    const StepRecord& rec = trajectory.steps[k];
    if (static_cast<int>(rec.actions.size()) != config.n_agents ||
        static_cast<int>(rec.observations.size()) != config.n_agents) {
      fail(k, "record has the wrong number of agents");
    }
    for (Action a : rec.actions) {
      if (static_cast<int>(a) < 0 || static_cast<int>(a) >= kNumActions) {
        fail(k, "action out of range");
      }
    }
    for (int i = 0; i < config.n_agents; ++i) {
      if (Observe(state, i, config) != rec.observations[i]) {
        fail(k, "observation does not match the replayed state");
      }
    }
    StepResult r = Step(state, rec.actions, config);
    if (r.next_state.agents != rec.positions) {
      fail(k, "positions do not follow from the recorded actions");
    }
    if (r.rewards != rec.rewards) fail(k, "rewards do not match the replay");
    state = std::move(r.next_state);
  }
}

std::vector<Positions> DemoPool::InitialPositions() const {
  std::vector<Positions> out;
  out.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) out.push_back(t.initial.agents);
  return out;
}

double DemoPool::MeanStepReward() const {
  if (trajectories.empty()) return 0.0;
  double total = 0.0;
  for (const Trajectory& t : trajectories) total += t.MeanStepReward();
  return total / static_cast<double>(trajectories.size());
}

DemoPool SubsamplePool(const DemoPool& pool, std::size_t count, std::uint64_t seed) {
  if (count > pool.size()) {
    throw PreconditionError("requested " + std::to_string(count) +
                            " demonstrations from a pool of " +
                            std::to_string(pool.size()));
  }
  std::vector<std::size_t> index(pool.size());
  std::iota(index.begin(), index.end(), 0);
  Rng rng = MakeRng(seed, "demo-subsample");
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + UniformIndex(rng, index.size() - i);
    std::swap(index[i], index[j]);
  }
  index.resize(count);
  std::sort(index.begin(), index.end());
  DemoPool out = pool;
  out.trajectories.clear();
  out.trajectories.reserve(count);
  for (std::size_t i : index) out.trajectories.push_back(pool.trajectories[i]);
  return out;
}

ExpertTrainingResult TrainExpert(const ScenarioConfig& config, int episodes,
                                 const PpoConfig& ppo, std::uint64_t seed,
                                 const ExpertProgressFn& progress) {
  if (episodes < 1) throw PreconditionError("expert training needs episodes >= 1");
  config.Validate();
  Rng init_rng = MakeRng(seed, "policy-init");
  Rng env_rng = MakeRng(seed, "env");
  Rng policy_rng = MakeRng(seed, "policy");
  PpoTrainer trainer(MakeSharedPolicy(ObservationSize(config), ppo, init_rng), ppo,
                     config.n_agents);

  ExpertTrainingResult result;
  result.log.reserve(episodes);
  SharedPolicy last_good = trainer.policy();
  int next_checkpoint = 1;
  const InitMode init = UniformRandom{};
  for (int episode = 1; episode <= episodes; ++episode) {
    const EpisodeRollout ep = CollectEpisode(trainer.policy(), config, init,
                                             ActMode::kSample, env_rng, policy_rng);
    PpoStats stats;
    try {
      AppendEpisode(trainer.buffer(), ep, ep.rewards);
      stats = trainer.Update();
    } catch (const DivergenceError& e) {
      throw TrainingDiverged(std::string("expert training diverged at episode ") +
                                 std::to_string(episode) + ": " + e.what(),
                             last_good, episode);
    }
    TrainingLogRow row{episode, ep.MeanStepReward(), stats.entropy, stats.policy_loss,
                       stats.value_loss};
    result.log.push_back(row);
    if (progress) progress(row);
    // Checkpoints at ceil(k * episodes / 10).
    while (next_checkpoint <= 10 &&
           episode >= (static_cast<long>(next_checkpoint) * episodes + 9) / 10) {
      result.checkpoints.emplace_back(episode, trainer.policy());
      last_good = trainer.policy();
      ++next_checkpoint;
    }
  }
  result.policy = trainer.policy();
  return result;
}

EpisodeRollout ReferenceRollout(const Actor& actor, const ScenarioConfig& config,
                                const InitMode& init, std::uint64_t seed,
                                std::size_t index) {
  Rng env_rng = MakeRng(seed, "env", index);
  Rng policy_rng = MakeRng(seed, "policy", index);
  return RunEpisode(actor, config, init, env_rng, policy_rng);
}

namespace {

// Wraps an actor with per-decision epsilon noise drawn from its own stream.
class NoisyActor : public Actor {
 public:
  NoisyActor(const Actor& base, double epsilon, Rng& noise)
      : base_(base), epsilon_(epsilon), noise_(noise) {}
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override {
    const Action chosen = base_.Act(agent_index, obs, rng);
    const double u = Uniform01(noise_);
    const auto random = static_cast<Action>(UniformIndex(noise_, kNumActions));
    return u < epsilon_ ? random : chosen;
  }

 private:
  const Actor& base_;
  double epsilon_;
  Rng& noise_;
};

}  // namespace

DemoPool GenerateDemos(const Actor& actor, const ScenarioConfig& config, int count,
                       double epsilon, const InitMode& init, std::uint64_t seed,
                       int jobs) {
  if (count < 1) throw PreconditionError("demonstration count must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw PreconditionError("epsilon must lie in [0, 1]");
  }
  config.Validate();
  DemoPool pool;
  pool.config = config;
  pool.epsilon = epsilon;
  pool.seed = seed;
  pool.trajectories.resize(count);
  ParallelFor(static_cast<std::size_t>(count), jobs, [&](std::size_t i) {
    Rng env_rng = MakeRng(seed, "env", i);
    Rng policy_rng = MakeRng(seed, "policy", i);
    Rng noise_rng = MakeRng(seed, "demo-noise", i);
    const NoisyActor noisy(actor, epsilon, noise_rng);
    const EpisodeRollout ep = RunEpisode(noisy, config, init, env_rng, policy_rng);
    pool.trajectories[i] = MakeTrajectory(ep, config.kind, DeriveSeed(seed, "trajectory", i));
  });
  return pool;
}

DemoPool GenerateDemos(const SharedPolicy& policy, const ScenarioConfig& config,
                       int count, double epsilon, const InitMode& init,
                       std::uint64_t seed, int jobs) {
  const PolicyActor actor(policy, ActMode::kSample);
  return GenerateDemos(actor, config, count, epsilon, init, seed, jobs);
}

std::filesystem::path PoolManifestPath(const std::filesystem::path& pool_path) {
  std::filesystem::path p = pool_path;
  p += ".manifest.json";
  return p;
}

namespace {

json TrajectoryToJson(const Trajectory& t) {
  json steps = json::array();
  for (const StepRecord& s : t.steps) {
    std::vector<int> actions;
    for (Action a : s.actions) actions.push_back(static_cast<int>(a));
    std::vector<std::string> rewards;
    for (double r : s.rewards) rewards.push_back(internal::FormatReal(r));
    steps.push_back({{"positions", internal::CellsToJson(s.positions)},
                     {"observations", s.observations},
                     {"actions", actions},
                     {"rewards", rewards}});
  }
  return {{"scenario", std::string(ScenarioName(t.kind))},
          {"seed", t.seed},
          {"init_positions", internal::CellsToJson(t.initial.agents)},
          {"steps", std::move(steps)}};
}

Trajectory TrajectoryFromJson(const json& j, const ScenarioConfig& config) {
  Trajectory t;
  const auto kind = ParseScenarioKind(j.at("scenario").get<std::string>());
  if (!kind) throw FormatError("unknown scenario in trajectory");
  t.kind = *kind;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.initial.agents = internal::CellsFromJson(j.at("init_positions"));
  t.initial.fixed_entities = config.fixed_entities;
  t.initial.timestep = 0;
  for (const json& s : j.at("steps")) {
    StepRecord rec;
    rec.positions = internal::CellsFromJson(s.at("positions"));
    rec.observations = s.at("observations").get<std::vector<Observation>>();
    for (int a : s.at("actions").get<std::vector<int>>()) {
      rec.actions.push_back(static_cast<Action>(a));
    }
    for (const auto& r : s.at("rewards").get<std::vector<std::string>>()) {
      rec.rewards.push_back(internal::ParseReal(r));
    }
    t.steps.push_back(std::move(rec));
  }
  return t;
}

}  // namespace

void SavePool(const DemoPool& pool, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write pool '" + path.string() + "'");
    for (const Trajectory& t : pool.trajectories) {
      out << TrajectoryToJson(t).dump() << '\n';
    }
    if (!out) throw FormatError("write failed for '" + path.string() + "'");
  }
  const json manifest = {{"format", "swarmrecon.demo_pool"},
                         {"version", kDemoPoolVersion},
                         {"pool_size", pool.trajectories.size()},
                         {"epsilon", pool.epsilon},
                         {"seed", pool.seed},
                         {"checkpoint_hash", pool.source_checkpoint},
                         {"scenario_config", internal::ConfigToJson(pool.config)}};
  std::ofstream out(PoolManifestPath(path), std::ios::trunc);
  if (!out) throw FormatError("cannot write pool manifest for '" + path.string() + "'");
  out << manifest.dump(2) << '\n';
}

DemoPool LoadPool(const std::filesystem::path& path) {
  std::ifstream manifest_in(PoolManifestPath(path));
  if (!manifest_in) {
    throw FormatError("missing pool manifest '" + PoolManifestPath(path).string() + "'");
  }
  DemoPool pool;
  std::size_t declared = 0;
  try {
    const json manifest = json::parse(manifest_in);
    if (manifest.value("format", "") != "swarmrecon.demo_pool") {
      throw FormatError("not a demonstration pool manifest");
    }
    const int version = manifest.at("version").get<int>();
    if (version != kDemoPoolVersion) {
      throw FormatError("pool version " + std::to_string(version) +
                        " is not supported (expected " +
                        std::to_string(kDemoPoolVersion) + ")");
    }
    pool.config = internal::ConfigFromJson(manifest.at("scenario_config"));
    pool.epsilon = manifest.at("epsilon").get<double>();
    pool.seed = manifest.at("seed").get<std::uint64_t>();
    pool.source_checkpoint = manifest.at("checkpoint_hash").get<std::string>();
    declared = manifest.at("pool_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError("malformed pool manifest: " + std::string(e.what()));
  }
  pool.config.Validate();

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open pool '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      pool.trajectories.push_back(TrajectoryFromJson(json::parse(line), pool.config));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": corrupted record: " + e.what());
    }
    try {
      ValidateTrajectory(pool.trajectories.back(), pool.config);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (pool.trajectories.size() != declared) {
    throw FormatError("pool holds " + std::to_string(pool.trajectories.size()) +
                      " trajectories, manifest declares " + std::to_string(declared));
  }
  return pool;
}

void WriteTrainingCsv(std::ostream& out, const std::vector<TrainingLogRow>& log) {
  out << "episode,mean_reward,entropy,policy_loss,value_loss\n";
  const auto old = out.precision(10);
  for (const TrainingLogRow& r : log) {
    out << r.episode << ',' << r.mean_reward << ',' << r.entropy << ','
        << r.policy_loss << ',' << r.value_loss << '\n';
  }
  out.precision(old);
}

}  // namespace swarmrecon
