#ifndef SWARMRECON_SCENARIO_H_
#define SWARMRECON_SCENARIO_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "swarmrecon/rng.h"

namespace swarmrecon {

// Grid control layer of the shared environment: a discrete Dec-POMDP in which
// a small swarm moves on a square grid next to fixed entities (hovering active
// UAVs, home cells or inactive obstacles depending on the scenario).

enum class ScenarioKind { kAggregation, kHoming, kObstacleAvoidance };

std::string_view ScenarioName(ScenarioKind kind);
// Accepts "aggregation", "homing", "obstacle_avoidance" (also with '-').
std::optional<ScenarioKind> ParseScenarioKind(std::string_view name);

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

using Positions = std::vector<Cell>;

enum class Action : int {
  kStop = 0,
  kRight = 1,
  kLeft = 2,
  kForward = 3,
  kBackward = 4,
};
inline constexpr int kNumActions = 5;

// Cell reached from `cell` by `action`, before boundary clamping.
Cell Displace(Cell cell, Action action);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kAggregation;
  int grid_size = 10;
  int n_agents = 3;
  Positions fixed_entities;
  int episode_length = 50;
  int perception_range = 6;
  double reward_c = 1.0;
  double aggregation_threshold_t = -1.5;
  double exploration_penalty = -0.05;
  // When set, aggregation cohesion c_n also considers the fixed active UAVs
  // as neighbours. The count of clustered agents still ranges over the swarm.
  bool aggregation_include_fixed = false;

  // Throws ConfigError when an invariant is violated.
  void Validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Defaults for `kind`, including the default fixed-entity layout.
ScenarioConfig DefaultConfig(ScenarioKind kind);
Positions DefaultFixedEntities(ScenarioKind kind);

// Obstacle contact costs this multiple of reward_c.
inline constexpr double kObstaclePenaltyScale = 10.0;
// Observation slot value for entities outside perception range.
inline constexpr double kOutOfRangeSentinel = 0.7;

struct GridState {
  Positions agents;
  Positions fixed_entities;
  int timestep = 0;
  friend bool operator==(const GridState&, const GridState&) = default;
};

using Observation = std::vector<double>;

struct StepResult {
  GridState next_state;
  std::vector<double> rewards;
  bool done = false;
};

// Episode initialisation modes.
struct FixedPositions {
  Positions agents;
};
struct UniformRandom {};
// Draws uniformly among recorded initial agent layouts.
struct SampleFromDemos {
  std::vector<Positions> starts;
};
using InitMode = std::variant<FixedPositions, UniformRandom, SampleFromDemos>;

GridState Reset(const ScenarioConfig& config, const InitMode& init, Rng& rng);
GridState Reset(const ScenarioConfig& config, const InitMode& init,
                std::uint64_t seed);

StepResult Step(const GridState& state, std::span<const Action> joint_action,
                const ScenarioConfig& config);

// Observation layout: [own x, own y] normalised by grid_size - 1, then one
// (dx, dy) / grid_size pair per teammate in index order and per fixed entity
// in config order, or the sentinel pair when the Chebyshev distance exceeds
// perception_range.
Observation Observe(const GridState& state, int agent_index,
                    const ScenarioConfig& config);
int ObservationSize(const ScenarioConfig& config);

double Distance(Cell a, Cell b);

std::vector<double> RewardAggregation(const GridState& state,
                                      const ScenarioConfig& config);
std::vector<double> RewardHoming(const GridState& state,
                                 const ScenarioConfig& config);
std::vector<double> RewardObstacle(const GridState& prev_state,
                                   const GridState& state,
                                   const ScenarioConfig& config);

// Dispatches to the reward of config.kind.
std::vector<double> ScenarioReward(const GridState& prev_state,
                                   const GridState& state,
                                   const ScenarioConfig& config);

bool InsideGrid(Cell cell, int grid_size);

}  // namespace swarmrecon

#endif  // SWARMRECON_SCENARIO_H_
