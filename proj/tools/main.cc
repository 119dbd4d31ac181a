#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmrecon/baselines.h"
#include "swarmrecon/checkpoint.h"
#include "swarmrecon/config_file.h"
#include "swarmrecon/demos.h"
#include "swarmrecon/error.h"
#include "swarmrecon/evaluation.h"
#include "swarmrecon/magail.h"
#include "swarmrecon/manifest.h"

namespace fs = std::filesystem;
using namespace swarmrecon;

namespace {

enum ExitCode {
  kOk = 0,
  kConfigExit = 2,
  kPreconditionExit = 3,
  kDivergenceExit = 4,
  kIoExit = 5,
};

constexpr const char* kOutDirVariable = "SWARMRECON_OUT_DIR";

struct GlobalOptions {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir;
  bool quiet = false;
  std::vector<std::string> argv;
};

fs::path OutPath(const GlobalOptions& g, const std::string& explicit_path,
                 const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(g.out_dir) / default_name;
}

// "<dir>/<stem>.<suffix>" next to `primary`.
fs::path Sibling(const fs::path& primary, const std::string& suffix) {
  fs::path p = primary;
  p.replace_extension(suffix);
  return p;
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

RunManifest StartManifest(const GlobalOptions& g, const std::string& command,
                          const fs::path& path) {
  RunManifest m;
  m.command = command;
  m.argv = g.argv;
  m.seed = g.seed;
  m.started_at = UtcTimestamp();
  EnsureParent(path);
  return m;
}

void FinishManifest(RunManifest& m, const fs::path& path) {
  m.finished_at = UtcTimestamp();
  m.status = "complete";
  WriteManifest(m, path);
}

// Every CSV output starts with a pointer to its manifest.
std::ofstream OpenCsv(const fs::path& path, const fs::path& manifest) {
  EnsureParent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# manifest: " << manifest.string() << '\n';
  return out;
}

std::string ToText(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void Log(const GlobalOptions& g, const std::string& line) {
  if (!g.quiet) std::cerr << line << '\n';
}

// ---------------------------------------------------------------------------

struct TrainExpertArgs {
  std::string scenario;
  int episodes = 20000;
  std::string output;
  double learning_rate = PpoConfig{}.actor_lr;
  std::vector<int> hidden = PpoConfig{}.hidden;
};

int RunTrainExpert(const GlobalOptions& g, const TrainExpertArgs& a) {
  const ScenarioConfig config = LoadScenarioConfig(a.scenario);
  PpoConfig ppo;
  ppo.actor_lr = ppo.critic_lr = a.learning_rate;
  ppo.hidden = a.hidden;
  ppo.Validate();
  if (a.episodes < 1) throw PreconditionError("--episodes must be >= 1");

  const fs::path ckpt = OutPath(g, a.output, "expert.json");
  const fs::path manifest_path = Sibling(ckpt, ".manifest.json");
  const fs::path csv_path = Sibling(ckpt, ".train.csv");
  RunManifest m = StartManifest(g, "train-expert", manifest_path);
  m.scenario = config;
  m.parameters = {{"episodes", std::to_string(a.episodes)},
                  {"learning_rate", ToText(a.learning_rate)}};
  m.inputs.push_back({a.scenario, HashFile(a.scenario)});
  m.outputs = {ckpt.string(), csv_path.string()};
  WriteManifest(m, manifest_path);

  Checkpoint c;
  c.kind = ModelKind::kExpert;
  c.metadata.scenario = config;
  c.metadata.seed = g.seed;
  c.metadata.manifest = manifest_path.string();

  const int report_every = std::max(1, a.episodes / 20);
  ExpertTrainingResult result;
  try {
    result = TrainExpert(config, a.episodes, ppo, g.seed, [&](const TrainingLogRow& row) {
      if (row.episode % report_every == 0) {
        Log(g, "train-expert: episode " + std::to_string(row.episode) + " reward " +
                   ToText(row.mean_reward));
      }
    });
  } catch (const TrainingDiverged& e) {
    c.policy = e.last_good();
    c.metadata.episodes = e.episode();
    const fs::path fallback = Sibling(ckpt, ".last_good.json");
    SaveCheckpoint(c, fallback);
    std::cerr << "train-expert: diverged at episode " << e.episode()
              << "; last good policy saved to " << fallback.string() << '\n';
    throw;
  }
  for (const auto& [episode, policy] : result.checkpoints) {
    c.policy = policy;
    c.metadata.episodes = episode;
    const fs::path p = Sibling(ckpt, ".ep" + std::to_string(episode) + ".json");
    SaveCheckpoint(c, p);
    m.outputs.push_back(p.string());
  }
  c.policy = result.policy;
  c.metadata.episodes = a.episodes;
  SaveCheckpoint(c, ckpt);
  {
    std::ofstream csv = OpenCsv(csv_path, manifest_path);
    WriteTrainingCsv(csv, result.log);
  }
  FinishManifest(m, manifest_path);
  std::cout << ckpt.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct GenDemosArgs {
  std::string checkpoint;
  std::string scenario;
  int count = 1000;
  double epsilon = 0.0;
  std::string output;
};

int RunGenDemos(const GlobalOptions& g, const GenDemosArgs& a) {
  const Checkpoint c = LoadCheckpoint(a.checkpoint);
  if (c.kind != ModelKind::kExpert) {
    throw PreconditionError("gen-demos needs an expert checkpoint, got '" +
                            std::string(ModelKindName(c.kind)) + "'");
  }
  if (!a.scenario.empty() && !(LoadScenarioConfig(a.scenario) == c.metadata.scenario)) {
    throw PreconditionError("scenario file '" + a.scenario +
                            "' does not match the checkpoint's scenario");
  }
  if (a.count < 1) throw PreconditionError("--count must be >= 1");

  const fs::path pool_path = OutPath(g, a.output, "demos.jsonl");
  const fs::path manifest_path = Sibling(pool_path, ".run.json");
  RunManifest m = StartManifest(g, "gen-demos", manifest_path);
  m.scenario = c.metadata.scenario;
  m.parameters = {{"count", std::to_string(a.count)}, {"epsilon", ToText(a.epsilon)}};
  const std::string ckpt_hash = HashFile(a.checkpoint);
  m.inputs.push_back({a.checkpoint, ckpt_hash});
  m.outputs = {pool_path.string(), PoolManifestPath(pool_path).string()};
  WriteManifest(m, manifest_path);

  DemoPool pool = GenerateDemos(*c.policy, c.metadata.scenario, a.count, a.epsilon,
                                UniformRandom{}, g.seed, g.jobs);
  pool.source_checkpoint = ckpt_hash;
  SavePool(pool, pool_path);
  Log(g, "gen-demos: " + std::to_string(pool.size()) + " trajectories, mean step reward " +
             ToText(pool.MeanStepReward()));
  FinishManifest(m, manifest_path);
  std::cout << pool_path.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainLearnerArgs {
  std::string algo = "magail";
  std::string pool;
  int demos = 400;
  int episodes = 10000;
  std::string reward_mode = std::string(RewardModeName(MagailOptions{}.reward_mode));
  bool swap_convention = MagailOptions{}.swap_convention;
  double disc_lr = DiscriminatorConfig{}.learning_rate;
  int bc_epochs = BcConfig{}.epochs;
  std::string output;
};

int RunTrainLearner(const GlobalOptions& g, const TrainLearnerArgs& a) {
  const auto mode = ParseRewardMode(a.reward_mode);
  if (!mode) throw ConfigError("unknown --reward-mode '" + a.reward_mode + "'");
  if (a.demos < 1) throw PreconditionError("--demos must be >= 1");
  if (a.episodes < 1) throw PreconditionError("--episodes must be >= 1");
  if (a.algo != "magail" && a.algo != "bc" && a.algo != "airl") {
    throw ConfigError("unknown --algo '" + a.algo + "' (expected magail, bc or airl)");
  }
  const DemoPool pool = LoadPool(a.pool);
  const ScenarioConfig& config = pool.config;
  const DemoPool demos =
      SubsamplePool(pool, static_cast<std::size_t>(a.demos), DeriveSeed(g.seed, "subsample"));

  const fs::path ckpt = OutPath(g, a.output, a.algo + ".json");
  const fs::path manifest_path = Sibling(ckpt, ".manifest.json");
  const fs::path csv_path = Sibling(ckpt, ".train.csv");
  RunManifest m = StartManifest(g, "train-learner", manifest_path);
  m.scenario = config;
  m.parameters = {{"algo", a.algo}, {"demos", std::to_string(a.demos)}};
  if (a.algo == "bc") {
    m.parameters.emplace_back("epochs", std::to_string(a.bc_epochs));
  } else {
    m.parameters.emplace_back("episodes", std::to_string(a.episodes));
    m.parameters.emplace_back("disc_lr", ToText(a.disc_lr));
  }
  if (a.algo == "magail") {
    m.parameters.emplace_back("reward_mode", a.reward_mode);
    m.parameters.emplace_back("swap_convention", a.swap_convention ? "true" : "false");
  }
  m.inputs.push_back({a.pool, HashFile(a.pool)});
  m.outputs = {ckpt.string(), csv_path.string()};
  WriteManifest(m, manifest_path);

  Checkpoint c;
  c.metadata.scenario = config;
  c.metadata.seed = g.seed;
  c.metadata.demonstrations = a.demos;
  c.metadata.manifest = manifest_path.string();
  std::ofstream csv = OpenCsv(csv_path, manifest_path);

  GailSchedule schedule;
  schedule.total_episodes = a.episodes;
  DiscriminatorConfig disc;
  disc.learning_rate = a.disc_lr;
  const PpoConfig ppo;
  const int report_every = std::max(1, a.episodes / 20);

  if (a.algo == "magail") {
    MagailOptions options;
    options.reward_mode = *mode;
    options.swap_convention = a.swap_convention;
    options.discriminator = disc;
    options.jobs = g.jobs;
    MagailResult r = TrainMagail(config, demos, schedule, ppo, options, g.seed,
                                 [&](const MagailLogRow& row) {
                                   if (row.episode % report_every == 0) {
                                     Log(g, "magail: episode " + std::to_string(row.episode) +
                                                " true reward " + ToText(row.true_reward_mean));
                                   }
                                 });
    c.kind = ModelKind::kMagail;
    c.metadata.episodes = a.episodes;
    c.policy = r.policy;
    c.discriminators = r.bank.discriminators;
    WriteMagailCsv(csv, r.log);
  } else if (a.algo == "airl") {
    AirlResult r = TrainAirl(config, demos, schedule, ppo, disc, g.seed,
                             [&](const AirlLogRow& row) {
                               if (row.episode % report_every == 0) {
                                 Log(g, "airl: episode " + std::to_string(row.episode) +
                                            " true reward " + ToText(row.true_reward_mean));
                               }
                             });
    c.kind = ModelKind::kAirl;
    c.metadata.episodes = a.episodes;
    c.policy = r.model.policy;
    c.reward_net = r.model.reward_net;
    WriteAirlCsv(csv, r.log);
  } else if (a.algo == "bc") {
    BcConfig bc;
    bc.epochs = a.bc_epochs;
    BcResult r = TrainBc(demos, config, bc, g.seed, g.jobs);
    c.kind = ModelKind::kBc;
    c.metadata.episodes = a.bc_epochs;
    c.bc_networks = r.model.networks;
    csv << "agent,train_samples,validation_samples,initial_loss,best_loss,best_epoch\n";
    for (std::size_t i = 0; i < r.stats.size(); ++i) {
      const BcAgentStats& s = r.stats[i];
      csv << i << ',' << s.train_samples << ',' << s.validation_samples << ','
          << ToText(s.initial_validation_loss) << ',' << ToText(s.best_validation_loss) << ','
          << s.best_epoch << '\n';
    }
  } else {
    throw ConfigError("unknown --algo '" + a.algo + "' (expected magail, bc or airl)");
  }
  csv.close();
  SaveCheckpoint(c, ckpt);
  FinishManifest(m, manifest_path);
  std::cout << ckpt.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string scenario;  // with --policy random
  std::string policy = "checkpoint";
  std::string init = "seen";
  std::string pool;
  int episodes = 200;
  double epsilon = 0.0;
  std::string act = "sample";
  std::vector<std::string> normalize;
  bool coverage = false;
  std::string output;
};

int RunEvaluate(const GlobalOptions& g, const EvaluateArgs& a) {
  const ActMode act_mode = a.act == "greedy" ? ActMode::kGreedy : ActMode::kSample;
  if (a.act != "greedy" && a.act != "sample") throw ConfigError("--act must be sample or greedy");

  ScenarioConfig config;
  std::unique_ptr<Actor> base;
  std::vector<ManifestInput> inputs;
  if (a.policy == "random") {
    if (a.scenario.empty()) throw PreconditionError("--policy random needs --scenario");
    config = LoadScenarioConfig(a.scenario);
    base = std::make_unique<RandomActor>();
    inputs.push_back({a.scenario, HashFile(a.scenario)});
  } else if (a.policy == "checkpoint") {
    if (a.checkpoint.empty()) throw PreconditionError("--checkpoint is required");
    const Checkpoint c = LoadCheckpoint(a.checkpoint);
    config = c.metadata.scenario;
    base = MakeCheckpointActor(c, act_mode);
    inputs.push_back({a.checkpoint, HashFile(a.checkpoint)});
  } else {
    throw ConfigError("--policy must be checkpoint or random");
  }
  const EpsilonActor actor(*base, a.epsilon);

  InitMode init;
  if (a.init == "seen") {
    if (a.pool.empty()) throw PreconditionError("--init seen needs --pool");
    const DemoPool pool = LoadPool(a.pool);
    if (!(pool.config == config)) {
      throw PreconditionError("pool scenario does not match the evaluated policy");
    }
    init = SampleFromDemos{pool.InitialPositions()};
    inputs.push_back({a.pool, HashFile(a.pool)});
  } else if (a.init == "random") {
    init = UniformRandom{};
  } else {
    throw ConfigError("--init must be seen or random");
  }
  std::optional<std::pair<double, double>> anchors;
  if (!a.normalize.empty()) {
    if (a.normalize.size() != 2) throw ConfigError("--normalize takes EXPERT.json RANDOM.json");
    anchors = {SummaryMeanFromJson(ReadFile(a.normalize[0])),
               SummaryMeanFromJson(ReadFile(a.normalize[1]))};
    inputs.push_back({a.normalize[0], HashFile(a.normalize[0])});
    inputs.push_back({a.normalize[1], HashFile(a.normalize[1])});
  }

  const fs::path prefix = OutPath(g, a.output, "eval");
  auto with_suffix = [&](const std::string& s) {
    fs::path p = prefix;
    p += s;
    return p;
  };
  const fs::path manifest_path = with_suffix(".manifest.json");
  RunManifest m = StartManifest(g, "evaluate", manifest_path);
  m.scenario = config;
  m.parameters = {{"policy", a.policy}, {"init", a.init}, {"episodes", std::to_string(a.episodes)},
                  {"epsilon", ToText(a.epsilon)}, {"act", a.act},
                  {"coverage", a.coverage ? "true" : "false"}};
  m.inputs = inputs;
  m.outputs = {with_suffix(".csv").string(), with_suffix(".json").string()};
  if (a.coverage) {
    m.outputs.push_back(with_suffix(".coverage.csv").string());
    m.outputs.push_back(with_suffix(".grid.csv").string());
  }
  WriteManifest(m, manifest_path);

  const std::uint64_t eval_seed = DeriveSeed(g.seed, "eval");
  EvalReport report = Evaluate(actor, config, a.episodes, init, eval_seed, g.jobs);
  if (anchors) report = Normalize(report, anchors->first, anchors->second);
  {
    std::ofstream csv = OpenCsv(with_suffix(".csv"), manifest_path);
    WriteEvalCsv(csv, report);
  }
  WriteFileAtomic(with_suffix(".json"), EvalSummaryJson(report));
  if (a.coverage) {
    const CoverageTrace trace = Coverage(actor, config, a.episodes, init, eval_seed);
    std::ofstream paths = OpenCsv(with_suffix(".coverage.csv"), manifest_path);
    WriteCoverageCsv(paths, trace);
    std::ofstream grid = OpenCsv(with_suffix(".grid.csv"), manifest_path);
    WriteCoverageGridCsv(grid, trace);
    Log(g, "evaluate: distinct cells " + std::to_string(trace.DistinctCells()));
  }
  FinishManifest(m, manifest_path);
  std::cout << "median " << report.summary.median << " mean " << report.summary.mean
            << " q1 " << report.summary.q1 << " q3 " << report.summary.q3 << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm behaviour reconstruction from demonstrations"};
  app.require_subcommand(1);
  GlobalOptions g;
  g.argv.assign(argv, argv + argc);
  const char* env_dir = std::getenv(kOutDirVariable);
  g.out_dir = env_dir != nullptr && *env_dir != '\0' ? env_dir : ".";
  app.add_option("--seed", g.seed, "Root seed for every random stream")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker thread cap")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir,
                 std::string("Default output directory (env ") + kOutDirVariable + ")")
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  TrainExpertArgs te;
  auto* cmd_te = app.add_subcommand("train-expert", "Train an expert swarm policy with PS-MAPPO");
  cmd_te->add_option("--scenario", te.scenario, "Scenario config file")->required();
  cmd_te->add_option("--episodes", te.episodes, "Training episodes")->capture_default_str();
  cmd_te->add_option("--output", te.output, "Checkpoint path");
  cmd_te->add_option("--lr", te.learning_rate, "Actor and critic learning rate")
      ->capture_default_str();
  cmd_te->add_option("--hidden", te.hidden, "Hidden layer widths")->capture_default_str();

  GenDemosArgs gd;
  auto* cmd_gd = app.add_subcommand("gen-demos", "Record a demonstration pool");
  cmd_gd->add_option("--checkpoint", gd.checkpoint, "Expert checkpoint")->required();
  cmd_gd->add_option("--scenario", gd.scenario, "Scenario file to check against the checkpoint");
  cmd_gd->add_option("--count", gd.count, "Trajectories")->capture_default_str();
  cmd_gd->add_option("--epsilon", gd.epsilon, "Expert optimality noise in [0, 1]")
      ->capture_default_str();
  cmd_gd->add_option("--output", gd.output, "Pool path (JSON lines)");

  TrainLearnerArgs tl;
  auto* cmd_tl = app.add_subcommand("train-learner", "Reconstruct a policy from demonstrations");
  cmd_tl->add_option("--algo", tl.algo, "magail, bc or airl")->capture_default_str();
  cmd_tl->add_option("--pool", tl.pool, "Demonstration pool")->required();
  cmd_tl->add_option("--demos", tl.demos, "Trajectories subsampled from the pool")
      ->capture_default_str();
  cmd_tl->add_option("--episodes", tl.episodes, "Learner episodes (magail, airl)")
      ->capture_default_str();
  cmd_tl->add_option("--reward-mode", tl.reward_mode,
                     "algorithm_one, log_d or neg_log_one_minus_d")
      ->capture_default_str();
  cmd_tl->add_flag("--swap-convention", tl.swap_convention,
                   "Train discriminators towards 1 on expert features");
  cmd_tl->add_option("--disc-lr", tl.disc_lr, "Discriminator learning rate")
      ->capture_default_str();
  cmd_tl->add_option("--bc-epochs", tl.bc_epochs, "Behaviour cloning epochs")
      ->capture_default_str();
  cmd_tl->add_option("--output", tl.output, "Checkpoint path");

  EvaluateArgs ev;
  auto* cmd_ev = app.add_subcommand("evaluate", "Evaluate a policy on the true reward");
  cmd_ev->add_option("--checkpoint", ev.checkpoint, "Checkpoint to evaluate");
  cmd_ev->add_option("--policy", ev.policy, "checkpoint or random")->capture_default_str();
  cmd_ev->add_option("--scenario", ev.scenario, "Scenario file (with --policy random)");
  cmd_ev->add_option("--init", ev.init, "seen or random")->capture_default_str();
  cmd_ev->add_option("--pool", ev.pool, "Demonstration pool for seen starts");
  cmd_ev->add_option("--episodes", ev.episodes, "Evaluation episodes")->capture_default_str();
  cmd_ev->add_option("--epsilon", ev.epsilon, "Random action probability")
      ->capture_default_str();
  cmd_ev->add_option("--act", ev.act, "sample or greedy")->capture_default_str();
  cmd_ev->add_option("--normalize", ev.normalize, "EXPERT.json RANDOM.json summaries")
      ->expected(2);
  cmd_ev->add_flag("--coverage", ev.coverage, "Also export coverage traces");
  cmd_ev->add_option("--output", ev.output, "Output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*cmd_te) return RunTrainExpert(g, te);
    if (*cmd_gd) return RunGenDemos(g, gd);
    if (*cmd_tl) return RunTrainLearner(g, tl);
    if (*cmd_ev) return RunEvaluate(g, ev);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kPreconditionExit;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return kDivergenceExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  }
  return kOk;
}
