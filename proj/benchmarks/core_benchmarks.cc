#include <benchmark/benchmark.h>

#include <vector>

#include "swarmrecon/features.h"
#include "swarmrecon/magail.h"
#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {
namespace {

ScenarioKind KindArg(const benchmark::State& state) {
  return static_cast<ScenarioKind>(state.range(0));
}

void BM_Step(benchmark::State& state) {
  const ScenarioConfig config = DefaultConfig(KindArg(state));
  Rng rng = MakeRng(1, "bench");
  GridState s = Reset(config, UniformRandom{}, rng);
  std::vector<Action> joint(config.n_agents);
  for (auto _ : state) {
    for (Action& a : joint) a = static_cast<Action>(UniformIndex(rng, kNumActions));
    StepResult r = Step(s, joint, config);
    s = r.done ? Reset(config, UniformRandom{}, rng) : std::move(r.next_state);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Step)->DenseRange(0, 2);

void BM_Observe(benchmark::State& state) {
  const ScenarioConfig config = DefaultConfig(KindArg(state));
  const GridState s = Reset(config, UniformRandom{}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Observe(s, 0, config));
}
BENCHMARK(BM_Observe)->DenseRange(0, 2);

void BM_Transform(benchmark::State& state) {
  const ScenarioConfig config = DefaultConfig(KindArg(state));
  const GridState s = Reset(config, UniformRandom{}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Transform(s, 0, config));
}
BENCHMARK(BM_Transform)->DenseRange(0, 2);

void BM_MlpForwardBatch(benchmark::State& state) {
  Rng rng = MakeRng(1, "bench");
  const Mlp m = Mlp::Create({5, 128, 128, 1}, Head::kSigmoid, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(m.ForwardBatch(x).output);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBatch)->Arg(1)->Arg(256)->Arg(7500);

void BM_MlpBackwardBatch(benchmark::State& state) {
  Rng rng = MakeRng(1, "bench");
  const Mlp m = Mlp::Create({5, 128, 128, 1}, Head::kSigmoid, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, state.range(0));
  const ForwardCache cache = m.ForwardBatch(x);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(m.BackwardLogits(cache, g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpBackwardBatch)->Arg(1)->Arg(256)->Arg(7500);

void BM_PpoEpisodeUpdate(benchmark::State& state) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const PpoConfig ppo;
  Rng rng = MakeRng(1, "bench");
  SharedPolicy policy = MakeSharedPolicy(ObservationSize(config), ppo, rng);
  Rng env = MakeRng(2, "env"), act = MakeRng(2, "policy");
  const EpisodeRollout ep =
      CollectEpisode(policy, config, UniformRandom{}, ActMode::kSample, env, act);
  RolloutBuffer buffer(config.n_agents);
  AppendEpisode(buffer, ep, ep.rewards);
  const GaeResult gae = ComputeGae(buffer, ppo);
  const PpoBatch batch = MakeBatch(buffer, gae);
  for (auto _ : state) {
    SharedPolicy p = policy;
    PpoOptimizers opt = MakeOptimizers(p, ppo);
    benchmark::DoNotOptimize(PpoUpdate(p, opt, batch, ppo));
  }
}
BENCHMARK(BM_PpoEpisodeUpdate)->Unit(benchmark::kMillisecond);

void BM_CollectEpisode(benchmark::State& state) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kObstacleAvoidance);
  Rng rng = MakeRng(1, "bench");
  const SharedPolicy policy = MakeSharedPolicy(ObservationSize(config), PpoConfig{}, rng);
  Rng env = MakeRng(2, "env"), act = MakeRng(2, "policy");
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        CollectEpisode(policy, config, UniformRandom{}, ActMode::kSample, env, act));
  }
}
BENCHMARK(BM_CollectEpisode)->Unit(benchmark::kMicrosecond);

void BM_DiscriminatorBurst(benchmark::State& state) {
  Rng rng = MakeRng(1, "bench");
  const Eigen::MatrixXd learner = -5.0 * Eigen::MatrixXd::Random(5, 2500).cwiseAbs();
  const Eigen::MatrixXd expert = -5.0 * Eigen::MatrixXd::Random(5, 7500).cwiseAbs();
  for (auto _ : state) {
    DiscriminatorBank bank = MakeDiscriminatorBank(1, 5, DiscriminatorConfig{}, rng);
    benchmark::DoNotOptimize(TrainDiscriminator(bank.discriminators[0], bank.optimizers[0],
                                                learner, expert, 5, 256, false, rng));
  }
}
BENCHMARK(BM_DiscriminatorBurst)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace swarmrecon

BENCHMARK_MAIN();
