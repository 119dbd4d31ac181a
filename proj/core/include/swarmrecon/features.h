#ifndef SWARMRECON_FEATURES_H_
#define SWARMRECON_FEATURES_H_

#include <iosfwd>
#include <string_view>
#include <vector>

#include "swarmrecon/scenario.h"

namespace swarmrecon {

struct Trajectory;

// Cohesion features of one agent: the negative euclidean distance to every
// other entity. The teammate block comes first, sorted nearest first, followed
// by the fixed entities in config order.
using FeatureVector = std::vector<double>;

enum class SourceTag { kExpert, kLearner };
std::string_view SourceTagName(SourceTag tag);

struct FeatureRow {
  FeatureVector values;
  SourceTag tag = SourceTag::kExpert;
  int agent = 0;
};

struct FeatureDataset {
  std::vector<FeatureRow> rows;
  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().values.size(); }
};

int FeatureSize(const ScenarioConfig& config);

// Uses the global state: perception range does not apply.
FeatureVector Transform(const GridState& state, int agent_index,
                        const ScenarioConfig& config);

// Transform() followed by a one-hot encoding of `action` (kNumActions slots).
FeatureVector TransformWithAction(const GridState& state, int agent_index,
                                  Action action, const ScenarioConfig& config);

// One row per (post-step state, agent). Throws PreconditionError on an empty
// list and on trajectories recorded under a different scenario layout.
FeatureDataset TransformTrajectories(const std::vector<Trajectory>& trajectories,
                                     const ScenarioConfig& config,
                                     SourceTag tag);

// CSV with header f0..fk,tag,agent.
void WriteFeatureCsv(std::ostream& out, const FeatureDataset& dataset);

}  // namespace swarmrecon

#endif  // SWARMRECON_FEATURES_H_
