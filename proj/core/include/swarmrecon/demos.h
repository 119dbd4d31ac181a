#ifndef SWARMRECON_DEMOS_H_
#define SWARMRECON_DEMOS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "swarmrecon/actor.h"
#include "swarmrecon/error.h"
#include "swarmrecon/ppo.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {

// One control-layer step: observations seen before acting, the joint action,
// the resulting agent positions and the true rewards received.
struct StepRecord {
  Positions positions;
  std::vector<Observation> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Trajectory {
  ScenarioKind kind = ScenarioKind::kAggregation;
  std::uint64_t seed = 0;
  GridState initial;
  std::vector<StepRecord> steps;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;

  // Post-step global states, one per step.
  std::vector<GridState> States() const;
  double MeanStepReward() const;
};

Trajectory MakeTrajectory(const EpisodeRollout& episode, ScenarioKind kind,
                          std::uint64_t seed);

// Replays the recorded actions from the initial state and throws FormatError
// unless positions, observations and rewards are reproduced bit-exactly.
void ValidateTrajectory(const Trajectory& trajectory, const ScenarioConfig& config);

struct DemoPool {
  ScenarioConfig config;
  std::vector<Trajectory> trajectories;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string source_checkpoint;  // content hash of the generating checkpoint

  std::size_t size() const { return trajectories.size(); }
  std::vector<Positions> InitialPositions() const;
  double MeanStepReward() const;
};

// Seeded uniform subsample without replacement, original order preserved.
DemoPool SubsamplePool(const DemoPool& pool, std::size_t count, std::uint64_t seed);

struct TrainingLogRow {
  int episode = 0;
  double mean_reward = 0.0;  // mean per-step per-agent true reward
  double entropy = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};

struct ExpertTrainingResult {
  SharedPolicy policy;
  std::vector<TrainingLogRow> log;
  std::vector<std::pair<int, SharedPolicy>> checkpoints;  // every 10%
};

// Raised when expert training diverges; carries the last finite checkpoint.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, SharedPolicy last_good, int episode)
      : DivergenceError(what), last_good_(std::move(last_good)), episode_(episode) {}
  const SharedPolicy& last_good() const { return last_good_; }
  int episode() const { return episode_; }

 private:
  SharedPolicy last_good_;
  int episode_;
};

using ExpertProgressFn = std::function<void(const TrainingLogRow&)>;

// PS-MAPPO on the true scenario reward from uniformly random starts, one
// update per episode.
ExpertTrainingResult TrainExpert(const ScenarioConfig& config, int episodes,
                                 const PpoConfig& ppo, std::uint64_t seed,
                                 const ExpertProgressFn& progress = {});

// Per agent and step, the actor's choice is replaced by a uniform random
// action with probability epsilon. Trajectory i uses the streams
// ("env", i), ("policy", i) and ("demo-noise", i) of `seed`, so the policy's
// own choices do not depend on epsilon.
DemoPool GenerateDemos(const Actor& actor, const ScenarioConfig& config,
                       int count, double epsilon, const InitMode& init,
                       std::uint64_t seed, int jobs = 1);
DemoPool GenerateDemos(const SharedPolicy& policy, const ScenarioConfig& config,
                       int count, double epsilon, const InitMode& init,
                       std::uint64_t seed, int jobs = 1);

// The noise-free rollout GenerateDemos builds trajectory `index` from.
EpisodeRollout ReferenceRollout(const Actor& actor, const ScenarioConfig& config,
                                const InitMode& init, std::uint64_t seed,
                                std::size_t index);

inline constexpr int kDemoPoolVersion = 1;

// JSON-lines pool (one trajectory per line) plus `<path>.manifest.json`.
void SavePool(const DemoPool& pool, const std::filesystem::path& path);
// Throws FormatError on version mismatch, malformed records or a trajectory
// that does not replay.
DemoPool LoadPool(const std::filesystem::path& path);
std::filesystem::path PoolManifestPath(const std::filesystem::path& pool_path);

void WriteTrainingCsv(std::ostream& out, const std::vector<TrainingLogRow>& log);

}  // namespace swarmrecon

#endif  // SWARMRECON_DEMOS_H_
