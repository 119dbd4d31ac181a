#ifndef SWARMRECON_EVALUATION_H_
#define SWARMRECON_EVALUATION_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmrecon/actor.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Linearly interpolated sample quantile (R type 7). `sorted` must be
// non-empty and ascending; p in [0, 1].
double Quantile(const std::vector<double>& sorted, double p);
SummaryStats Summarize(std::vector<double> values);

std::string InitModeName(const InitMode& init);

struct EvalReport {
  std::string init_mode;
  int episodes = 0;
  int n_agents = 0;
  // Episode reward: sum over steps of the mean per-agent true reward.
  std::vector<double> episode_rewards;
  // [episode][agent]: sum over steps of that agent's true reward.
  std::vector<std::vector<double>> agent_rewards;
  SummaryStats summary;
  std::optional<double> expert_anchor;
  std::optional<double> random_anchor;
};

// Episode i plays with the streams ("eval-env", i) and ("eval-policy", i) of
// `seed`. Throws PreconditionError if episodes < 1 or a SampleFromDemos init
// carries no start states.
EvalReport Evaluate(const Actor& actor, const ScenarioConfig& config, int episodes,
                    const InitMode& init, std::uint64_t seed, int jobs = 1);

// v -> (v - random_mean) / (expert_mean - random_mean) on every reward.
EvalReport Normalize(const EvalReport& report, double expert_mean, double random_mean);

struct CoverageTrace {
  int grid_size = 0;
  int n_agents = 0;
  int episode_length = 0;
  // [episode][agent][t] for t = 0 .. episode_length - 1, starting from the
  // initial cell.
  std::vector<std::vector<std::vector<Cell>>> paths;
  // Visit counts indexed [y * grid_size + x].
  std::vector<long> counts;

  long TotalVisits() const;
  int DistinctCells() const;
};

CoverageTrace Coverage(const Actor& actor, const ScenarioConfig& config, int episodes,
                       const InitMode& init, std::uint64_t seed);

void WriteEvalCsv(std::ostream& out, const EvalReport& report);
std::string EvalSummaryJson(const EvalReport& report);
// Reads the summary mean back from EvalSummaryJson output.
double SummaryMeanFromJson(const std::string& text);
void WriteCoverageCsv(std::ostream& out, const CoverageTrace& trace);
void WriteCoverageGridCsv(std::ostream& out, const CoverageTrace& trace);

}  // namespace swarmrecon

#endif  // SWARMRECON_EVALUATION_H_
