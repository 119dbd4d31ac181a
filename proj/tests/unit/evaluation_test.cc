#include "swarmrecon/evaluation.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "swarmrecon/error.h"
#include "test_helpers.h"

namespace swarmrecon {
namespace {

TEST(QuantileTest, TypeSevenInterpolation) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(Quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(Quantile({7.0}, 0.3), 7.0);
  EXPECT_THROW(Quantile({}, 0.5), PreconditionError);
  EXPECT_THROW(Quantile(v, 1.5), PreconditionError);
}

TEST(SummarizeTest, UnsortedInput) {
  const SummaryStats s = Summarize({5, 1, 4, 2, 3});
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q1, 2.0);
  EXPECT_DOUBLE_EQ(s.q3, 4.0);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 5.0);
}

TEST(EvaluateTest, ScriptedExpertBeatsRandom) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const testing::SeekFixedActor expert(config);
  const RandomActor random;
  const EvalReport e = Evaluate(expert, config, 50, UniformRandom{}, 3);
  const EvalReport r = Evaluate(random, config, 50, UniformRandom{}, 3);
  EXPECT_GT(e.summary.median, r.summary.median);
  EXPECT_EQ(e.init_mode, "random");
  ASSERT_EQ(e.episode_rewards.size(), 50u);
  ASSERT_EQ(e.agent_rewards.size(), 50u);
  for (int i = 0; i < 50; ++i) {
    const double agent_mean =
        std::accumulate(e.agent_rewards[i].begin(), e.agent_rewards[i].end(), 0.0) / 3;
    EXPECT_NEAR(e.episode_rewards[i], agent_mean, 1e-9);
  }
}

TEST(EvaluateTest, DeterministicAcrossJobsAndSeedSensitive) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kAggregation);
  const RandomActor random;
  const EvalReport a = Evaluate(random, config, 20, UniformRandom{}, 7, 1);
  const EvalReport b = Evaluate(random, config, 20, UniformRandom{}, 7, 4);
  const EvalReport c = Evaluate(random, config, 20, UniformRandom{}, 8, 1);
  EXPECT_EQ(a.episode_rewards, b.episode_rewards);
  EXPECT_NE(a.episode_rewards, c.episode_rewards);
}

TEST(EvaluateTest, SeenStartsComeFromDemos) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const DemoPool pool = testing::SeekDemos(ScenarioKind::kHoming, 1, 4);
  const ConstantActor stay(Action::kStop);
  const CoverageTrace trace = Coverage(stay, config, 3, SampleFromDemos{pool.InitialPositions()}, 2);
  for (const auto& episode : trace.paths) {
    for (int a = 0; a < 3; ++a) EXPECT_EQ(episode[a][0], pool.trajectories[0].initial.agents[a]);
  }
  const EvalReport r = Evaluate(stay, config, 3, SampleFromDemos{pool.InitialPositions()}, 2);
  EXPECT_EQ(r.init_mode, "seen");
  EXPECT_THROW(Evaluate(stay, config, 3, SampleFromDemos{}, 2), PreconditionError);
  EXPECT_THROW(Evaluate(stay, config, 0, UniformRandom{}, 2), PreconditionError);
}

TEST(NormalizeTest, AnchorsMapToZeroAndOne) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const RandomActor random;
  const EvalReport r = Evaluate(random, config, 10, UniformRandom{}, 1);
  const EvalReport n = Normalize(r, -20.0, -130.0);
  for (std::size_t i = 0; i < r.episode_rewards.size(); ++i) {
    EXPECT_NEAR(n.episode_rewards[i], (r.episode_rewards[i] + 130.0) / 110.0, 1e-12);
  }
  EXPECT_NEAR(Normalize(r, r.summary.mean, -1000).summary.mean, 1.0, 1e-12);
  EXPECT_NEAR(Normalize(r, 1000, r.summary.mean).summary.mean, 0.0, 1e-12);
  EXPECT_EQ(n.expert_anchor, -20.0);
  EXPECT_THROW(Normalize(r, 1.0, 1.0), PreconditionError);
}

TEST(CoverageTest, StationaryAgentsVisitOneCellEach) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kAggregation);
  const ConstantActor stay(Action::kStop);
  const FixedPositions start{{{0, 0}, {4, 4}, {9, 9}}};
  const CoverageTrace trace = Coverage(stay, config, 2, start, 1);
  EXPECT_EQ(trace.DistinctCells(), 3);
  EXPECT_EQ(trace.counts[0], 2 * config.episode_length);
  EXPECT_EQ(trace.counts[4 * 10 + 4], 2 * config.episode_length);
  EXPECT_EQ(trace.counts[9 * 10 + 9], 2 * config.episode_length);
}

TEST(CoverageTest, VisitsAreConserved) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kObstacleAvoidance);
  const RandomActor random;
  const CoverageTrace trace = Coverage(random, config, 4, UniformRandom{}, 5);
  EXPECT_EQ(trace.TotalVisits(), 4L * config.n_agents * config.episode_length);
  long sum = 0;
  for (long c : trace.counts) sum += c;
  EXPECT_EQ(sum, trace.TotalVisits());
  EXPECT_GT(trace.DistinctCells(), 3);
  for (const auto& episode : trace.paths) {
    for (const auto& path : episode) {
      ASSERT_EQ(path.size(), static_cast<std::size_t>(config.episode_length));
      for (std::size_t t = 1; t < path.size(); ++t) {
        EXPECT_LE(std::abs(path[t].x - path[t - 1].x) + std::abs(path[t].y - path[t - 1].y), 1);
      }
    }
  }
}

TEST(ExportTest, CsvAndJson) {
  const ScenarioConfig config = DefaultConfig(ScenarioKind::kHoming);
  const RandomActor random;
  const EvalReport r = Evaluate(random, config, 4, UniformRandom{}, 1);
  std::ostringstream csv;
  WriteEvalCsv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "episode,episode_reward,agent_0,agent_1,agent_2");
  EXPECT_NEAR(SummaryMeanFromJson(EvalSummaryJson(r)), r.summary.mean, 1e-9);
  EXPECT_THROW(SummaryMeanFromJson("{}"), FormatError);

  const CoverageTrace trace = Coverage(random, config, 1, UniformRandom{}, 1);
  std::ostringstream paths, grid;
  WriteCoverageCsv(paths, trace);
  WriteCoverageGridCsv(grid, trace);
  EXPECT_EQ(paths.str().substr(0, paths.str().find('\n')), "episode,agent,step,x,y");
  EXPECT_EQ(grid.str().substr(0, grid.str().find('\n')), "x,y,count");
  const std::string grid_text = grid.str();
  EXPECT_EQ(std::count(grid_text.begin(), grid_text.end(), '\n'), 101);
}

}  // namespace
}  // namespace swarmrecon
