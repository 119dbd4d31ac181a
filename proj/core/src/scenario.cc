#include "swarmrecon/scenario.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "swarmrecon/error.h"

namespace swarmrecon {

std::string_view ScenarioName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kAggregation:
      return "aggregation";
    case ScenarioKind::kHoming:
      return "homing";
    case ScenarioKind::kObstacleAvoidance:
      return "obstacle_avoidance";
  }
  return "unknown";
}

std::optional<ScenarioKind> ParseScenarioKind(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "aggregation") return ScenarioKind::kAggregation;
  if (s == "homing") return ScenarioKind::kHoming;
  if (s == "obstacle_avoidance" || s == "obstacleavoidance" || s == "obstacle")
    return ScenarioKind::kObstacleAvoidance;
  return std::nullopt;
}

Cell Displace(Cell cell, Action action) {
  switch (action) {
    case Action::kStop:
      return cell;
    case Action::kRight:
      return {cell.x + 1, cell.y};
    case Action::kLeft:
      return {cell.x - 1, cell.y};
    case Action::kForward:
      return {cell.x, cell.y + 1};
    case Action::kBackward:
      return {cell.x, cell.y - 1};
  }
  return cell;
}

bool InsideGrid(Cell cell, int grid_size) {
  return cell.x >= 0 && cell.y >= 0 && cell.x < grid_size &&
         cell.y < grid_size;
}

Positions DefaultFixedEntities(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kAggregation:
      return {{2, 7}, {7, 2}};
    case ScenarioKind::kHoming:
      return {{1, 1}, {8, 1}, {4, 8}};
    case ScenarioKind::kObstacleAvoidance:
      return {{3, 3}, {6, 6}, {3, 7}};
  }
  return {};
}

ScenarioConfig DefaultConfig(ScenarioKind kind) {
  ScenarioConfig config;
  config.kind = kind;
  config.fixed_entities = DefaultFixedEntities(kind);
  return config;
}

void ScenarioConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (grid_size < 2) fail("grid_size must be >= 2");
  if (n_agents < 2) fail("n_agents must be >= 2");
  if (episode_length <= 0) fail("episode_length must be > 0");
  if (perception_range < 0) fail("perception_range must be >= 0");
  if (!(reward_c > 0.0)) fail("reward_c must be positive");
  if (exploration_penalty > 0.0) fail("exploration_penalty must be <= 0");
  for (const Cell& c : fixed_entities) {
    if (!InsideGrid(c, grid_size)) {
      std::ostringstream os;
      os << "fixed entity (" << c.x << "," << c.y << ") outside the "
         << grid_size << "x" << grid_size << " grid";
      fail(os.str());
    }
  }
}

namespace {

void CheckPositions(const Positions& agents, const ScenarioConfig& config) {
  if (static_cast<int>(agents.size()) != config.n_agents) {
    throw PreconditionError("expected " + std::to_string(config.n_agents) +
                            " agent positions, got " +
                            std::to_string(agents.size()));
  }
  for (const Cell& c : agents) {
    if (!InsideGrid(c, config.grid_size)) {
      throw PreconditionError("agent position (" + std::to_string(c.x) + "," +
                              std::to_string(c.y) + ") outside grid");
    }
  }
}

}  // namespace

GridState Reset(const ScenarioConfig& config, const InitMode& init, Rng& rng) {
  config.Validate();
  GridState state;
  state.fixed_entities = config.fixed_entities;
  state.timestep = 0;

  if (const auto* fixed = std::get_if<FixedPositions>(&init)) {
    CheckPositions(fixed->agents, config);
    state.agents = fixed->agents;
  } else if (std::holds_alternative<UniformRandom>(init)) {
    Positions free_cells;
    for (int y = 0; y < config.grid_size; ++y) {
      for (int x = 0; x < config.grid_size; ++x) {
        const Cell c{x, y};
        if (std::find(config.fixed_entities.begin(),
                      config.fixed_entities.end(),
                      c) == config.fixed_entities.end()) {
          free_cells.push_back(c);
        }
      }
    }
    if (free_cells.empty()) {
      throw PreconditionError("no free cell for random initialisation");
    }
    state.agents.reserve(config.n_agents);
    for (int i = 0; i < config.n_agents; ++i) {
      state.agents.push_back(free_cells[UniformIndex(rng, free_cells.size())]);
    }
  } else {
    const auto& demos = std::get<SampleFromDemos>(init);
    if (demos.starts.empty()) {
      throw PreconditionError("SampleFromDemos requires recorded start states");
    }
    const Positions& start = demos.starts[UniformIndex(rng, demos.starts.size())];
    CheckPositions(start, config);
    state.agents = start;
  }
  return state;
}

GridState Reset(const ScenarioConfig& config, const InitMode& init,
                std::uint64_t seed) {
  Rng rng = MakeRng(seed, "env");
  return Reset(config, init, rng);
}

StepResult Step(const GridState& state, std::span<const Action> joint_action,
                const ScenarioConfig& config) {
  if (state.timestep >= config.episode_length) {
    throw PreconditionError("cannot step a terminal state");
  }
  if (static_cast<int>(joint_action.size()) != config.n_agents ||
      state.agents.size() != joint_action.size()) {
    throw PreconditionError("joint action size does not match n_agents");
  }
  StepResult result;
  result.next_state.fixed_entities = state.fixed_entities;
  result.next_state.timestep = state.timestep + 1;
  result.next_state.agents.reserve(state.agents.size());
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    const int a = static_cast<int>(joint_action[i]);
    if (a < 0 || a >= kNumActions) {
      throw PreconditionError("action index out of range");
    }
    const Cell moved = Displace(state.agents[i], joint_action[i]);
    result.next_state.agents.push_back(
        InsideGrid(moved, config.grid_size) ? moved : state.agents[i]);
  }
  result.rewards = ScenarioReward(state, result.next_state, config);
  result.done = result.next_state.timestep == config.episode_length;
  return result;
}

int ObservationSize(const ScenarioConfig& config) {
  return 2 + 2 * (config.n_agents - 1) +
         2 * static_cast<int>(config.fixed_entities.size());
}

Observation Observe(const GridState& state, int agent_index,
                    const ScenarioConfig& config) {
  if (agent_index < 0 || agent_index >= static_cast<int>(state.agents.size())) {
    throw PreconditionError("agent index out of range");
  }
  const Cell self = state.agents[agent_index];
  const double pos_scale = 1.0 / (config.grid_size - 1);
  const double rel_scale = 1.0 / config.grid_size;

  Observation obs;
  obs.reserve(ObservationSize(config));
  obs.push_back(self.x * pos_scale);
  obs.push_back(self.y * pos_scale);

  auto push_relative = [&](Cell other) {
    const int dx = other.x - self.x;
    const int dy = other.y - self.y;
    if (std::max(std::abs(dx), std::abs(dy)) <= config.perception_range) {
      obs.push_back(dx * rel_scale);
      obs.push_back(dy * rel_scale);
    } else {
      obs.push_back(kOutOfRangeSentinel);
      obs.push_back(kOutOfRangeSentinel);
    }
  };
  for (int j = 0; j < static_cast<int>(state.agents.size()); ++j) {
    if (j != agent_index) push_relative(state.agents[j]);
  }
  for (const Cell& f : state.fixed_entities) push_relative(f);
  return obs;
}

double Distance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.x - b.x),
                    static_cast<double>(a.y - b.y));
}

namespace {

void RequireKind(const ScenarioConfig& config, ScenarioKind kind) {
  if (config.kind != kind) {
    throw PreconditionError(std::string("reward for ") +
                            std::string(ScenarioName(kind)) +
                            " requested on a " +
                            std::string(ScenarioName(config.kind)) +
                            " scenario");
  }
}

}  // namespace

std::vector<double> RewardAggregation(const GridState& state,
                                      const ScenarioConfig& config) {
  RequireKind(config, ScenarioKind::kAggregation);
  const std::size_t n = state.agents.size();
  int clustered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, Distance(state.agents[i], state.agents[j]));
    }
    if (config.aggregation_include_fixed) {
      for (const Cell& f : state.fixed_entities) {
        nearest = std::min(nearest, Distance(state.agents[i], f));
      }
    }
    const double cohesion = -nearest;
    if (cohesion > config.aggregation_threshold_t) ++clustered;
  }
  const double r =
      clustered > 1 ? clustered * config.reward_c : -config.reward_c;
  return std::vector<double>(n, r);
}

std::vector<double> RewardHoming(const GridState& state,
                                 const ScenarioConfig& config) {
  RequireKind(config, ScenarioKind::kHoming);
  std::vector<double> rewards;
  rewards.reserve(state.agents.size());
  for (const Cell& a : state.agents) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Cell& h : state.fixed_entities) best = std::max(best, -Distance(a, h));
    rewards.push_back(state.fixed_entities.empty() ? 0.0 : best);
  }
  return rewards;
}

std::vector<double> RewardObstacle(const GridState& prev_state,
                                   const GridState& state,
                                   const ScenarioConfig& config) {
  RequireKind(config, ScenarioKind::kObstacleAvoidance);
  if (prev_state.agents.size() != state.agents.size()) {
    throw PreconditionError("previous and current state disagree on n_agents");
  }
  const double contact = -kObstaclePenaltyScale * config.reward_c;
  std::vector<double> rewards;
  rewards.reserve(state.agents.size());
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    const Cell a = state.agents[i];
    const bool on_obstacle =
        std::find(state.fixed_entities.begin(), state.fixed_entities.end(),
                  a) != state.fixed_entities.end();
    if (on_obstacle) {
      rewards.push_back(contact);
    } else if (a == prev_state.agents[i]) {
      rewards.push_back(config.exploration_penalty);
    } else {
      rewards.push_back(0.0);
    }
  }
  return rewards;
}

std::vector<double> ScenarioReward(const GridState& prev_state,
                                   const GridState& state,
                                   const ScenarioConfig& config) {
  switch (config.kind) {
    case ScenarioKind::kAggregation:
      return RewardAggregation(state, config);
    case ScenarioKind::kHoming:
      return RewardHoming(state, config);
    case ScenarioKind::kObstacleAvoidance:
      return RewardObstacle(prev_state, state, config);
  }
  return {};
}

}  // namespace swarmrecon
