#include "swarmrecon/features.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "swarmrecon/actor.h"
#include "swarmrecon/demos.h"
#include "swarmrecon/error.h"

namespace swarmrecon {
namespace {

GridState MakeState(const ScenarioConfig& c, Positions agents) {
  return Reset(c, FixedPositions{std::move(agents)}, std::uint64_t{0});
}

TEST(TransformTest, HandComputedDistances) {
  ScenarioConfig c = DefaultConfig(ScenarioKind::kAggregation);
  c.grid_size = 20;
  c.fixed_entities = {{3, 4}, {5, 12}};
  const FeatureVector f = Transform(MakeState(c, {{0, 0}, {0, 0}, {0, 0}}), 0, c);
  EXPECT_EQ(f, (FeatureVector{0.0, 0.0, -5.0, -13.0}));
}

TEST(TransformTest, AllCoLocatedGivesZeros) {
  ScenarioConfig c = DefaultConfig(ScenarioKind::kHoming);
  c.fixed_entities = {{4, 4}, {4, 4}, {4, 4}};
  const FeatureVector f = Transform(MakeState(c, {{4, 4}, {4, 4}, {4, 4}}), 1, c);
  EXPECT_EQ(f, FeatureVector(5, 0.0));
}

TEST(TransformTest, LengthPerScenario) {
  EXPECT_EQ(FeatureSize(DefaultConfig(ScenarioKind::kAggregation)), 4);
  EXPECT_EQ(FeatureSize(DefaultConfig(ScenarioKind::kHoming)), 5);
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kHoming);
  EXPECT_EQ(Transform(MakeState(c, {{0, 0}, {1, 1}, {2, 2}}), 0, c).size(), 5u);
  EXPECT_THROW(Transform(MakeState(c, {{0, 0}, {1, 1}, {2, 2}}), 3, c), PreconditionError);
}

TEST(TransformTest, TeammatesSortedNearestFirstAndNonPositive) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kObstacleAvoidance);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const GridState s = Reset(c, UniformRandom{}, seed);
    for (int i = 0; i < c.n_agents; ++i) {
      const FeatureVector f = Transform(s, i, c);
      EXPECT_TRUE(std::is_sorted(f.begin(), f.begin() + c.n_agents - 1, std::greater<>()));
      EXPECT_LE(*std::max_element(f.begin(), f.end()), 0.0);
    }
  }
}

TEST(TransformTest, TeammatePermutationInvariance) {
  ScenarioConfig c = DefaultConfig(ScenarioKind::kHoming);
  c.n_agents = 4;
  const GridState a = MakeState(c, {{1, 1}, {5, 2}, {7, 7}, {0, 9}});
  const GridState b = MakeState(c, {{1, 1}, {0, 9}, {5, 2}, {7, 7}});
  EXPECT_EQ(Transform(a, 0, c), Transform(b, 0, c));
}

TEST(TransformTest, TranslationInvariance) {
  ScenarioConfig c = DefaultConfig(ScenarioKind::kHoming);
  c.fixed_entities = {{1, 1}, {2, 5}, {4, 0}};
  ScenarioConfig shifted = c;
  for (Cell& f : shifted.fixed_entities) f = {f.x + 4, f.y + 3};
  const GridState a = MakeState(c, {{0, 0}, {3, 2}, {5, 6}});
  const GridState b = MakeState(shifted, {{4, 3}, {7, 5}, {9, 9}});
  for (int i = 0; i < 3; ++i) EXPECT_EQ(Transform(a, i, c), Transform(b, i, shifted));
}

TEST(TransformTest, WithActionAppendsOneHot) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kAggregation);
  const GridState s = MakeState(c, {{0, 0}, {1, 1}, {2, 2}});
  const FeatureVector f = TransformWithAction(s, 0, Action::kLeft, c);
  ASSERT_EQ(f.size(), 9u);
  EXPECT_EQ(std::vector<double>(f.begin() + 4, f.end()), (std::vector<double>{0, 0, 1, 0, 0}));
}

Trajectory StopTrajectory(const ScenarioConfig& c, std::uint64_t seed) {
  const ConstantActor stop(Action::kStop);
  Rng env = MakeRng(seed, "env");
  Rng pol = MakeRng(seed, "policy");
  return MakeTrajectory(RunEpisode(stop, c, UniformRandom{}, env, pol), c.kind, seed);
}

TEST(TransformTrajectoriesTest, RowCounts) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kAggregation);
  EXPECT_EQ(TransformTrajectories({StopTrajectory(c, 1)}, c, SourceTag::kExpert).rows.size(), 150u);
  std::vector<Trajectory> many;
  for (std::uint64_t i = 0; i < 400; ++i) many.push_back(StopTrajectory(c, i));
  const FeatureDataset d = TransformTrajectories(many, c, SourceTag::kLearner);
  EXPECT_EQ(d.rows.size(), 60000u);
  EXPECT_EQ(d.dimension(), 4u);
  EXPECT_EQ(d.rows.front().tag, SourceTag::kLearner);
}

TEST(TransformTrajectoriesTest, Errors) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kAggregation);
  EXPECT_THROW(TransformTrajectories({}, c, SourceTag::kExpert), PreconditionError);
  const ScenarioConfig h = DefaultConfig(ScenarioKind::kHoming);
  EXPECT_THROW(TransformTrajectories({StopTrajectory(h, 1)}, c, SourceTag::kExpert),
               PreconditionError);
}

TEST(TransformTrajectoriesTest, UsesPostStepStates) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kHoming);
  const Trajectory t = StopTrajectory(c, 5);
  const FeatureDataset d = TransformTrajectories({t}, c, SourceTag::kExpert);
  const std::vector<GridState> states = t.States();
  for (int s = 0; s < 50; ++s) {
    for (int i = 0; i < 3; ++i) EXPECT_EQ(d.rows[s * 3 + i].values, Transform(states[s], i, c));
  }
}

TEST(FeatureCsvTest, HeaderAndRows) {
  const ScenarioConfig c = DefaultConfig(ScenarioKind::kAggregation);
  std::ostringstream os;
  WriteFeatureCsv(os, TransformTrajectories({StopTrajectory(c, 2)}, c, SourceTag::kExpert));
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "f0,f1,f2,f3,tag,agent");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 150);
}

}  // namespace
}  // namespace swarmrecon
