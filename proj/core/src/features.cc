#include "swarmrecon/features.h"

#include <algorithm>
#include <functional>
#include <ostream>

#include "swarmrecon/demos.h"
#include "swarmrecon/error.h"

namespace swarmrecon {

std::string_view SourceTagName(SourceTag tag) {
  return tag == SourceTag::kExpert ? "expert" : "learner";
}

int FeatureSize(const ScenarioConfig& config) {
  return config.n_agents - 1 + static_cast<int>(config.fixed_entities.size());
}

FeatureVector Transform(const GridState& state, int agent_index,
                        const ScenarioConfig& config) {
  const int n = static_cast<int>(state.agents.size());
  if (agent_index < 0 || agent_index >= n) {
    throw PreconditionError("agent index out of range");
  }
  (void)config;
  const Cell self = state.agents[agent_index];
  FeatureVector f;
  f.reserve(n - 1 + state.fixed_entities.size());
  for (int j = 0; j < n; ++j) {
    if (j != agent_index) f.push_back(-Distance(self, state.agents[j]));
  }
  std::sort(f.begin(), f.end(), std::greater<>());
  for (const Cell& e : state.fixed_entities) f.push_back(-Distance(self, e));
  return f;
}

FeatureVector TransformWithAction(const GridState& state, int agent_index,
                                  Action action, const ScenarioConfig& config) {
  FeatureVector f = Transform(state, agent_index, config);
  const std::size_t base = f.size();
  f.resize(base + kNumActions, 0.0);
  f[base + static_cast<int>(action)] = 1.0;
  return f;
}

FeatureDataset TransformTrajectories(const std::vector<Trajectory>& trajectories,
                                     const ScenarioConfig& config,
                                     SourceTag tag) {
  if (trajectories.empty()) {
    throw PreconditionError("no trajectories to transform");
  }
  FeatureDataset dataset;
  std::size_t total = 0;
  for (const Trajectory& t : trajectories) total += t.steps.size();
  dataset.rows.reserve(total * config.n_agents);

  for (const Trajectory& t : trajectories) {
    if (t.kind != config.kind ||
        static_cast<int>(t.initial.agents.size()) != config.n_agents ||
        t.initial.fixed_entities != config.fixed_entities) {
      throw PreconditionError(
          "trajectory recorded under a different scenario configuration");
    }
    GridState state = t.initial;
    for (const StepRecord& step : t.steps) {
      state.agents = step.positions;
      ++state.timestep;
      for (int i = 0; i < config.n_agents; ++i) {
        dataset.rows.push_back({Transform(state, i, config), tag, i});
      }
    }
  }
  return dataset;
}

void WriteFeatureCsv(std::ostream& out, const FeatureDataset& dataset) {
  const std::size_t dim = dataset.dimension();
  for (std::size_t k = 0; k < dim; ++k) out << 'f' << k << ',';
  out << "tag,agent\n";
  const auto old_precision = out.precision(17);
  for (const FeatureRow& row : dataset.rows) {
    for (double v : row.values) out << v << ',';
    out << SourceTagName(row.tag) << ',' << row.agent << '\n';
  }
  out.precision(old_precision);
}

}  // namespace swarmrecon
