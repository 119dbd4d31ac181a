#include "swarmrecon/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json_io.h"
#include "swarmrecon/error.h"
#include "swarmrecon/parallel.h"

namespace swarmrecon {

using internal::json;

double Quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats Summarize(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("summary of an empty sample");
  std::sort(values.begin(), values.end());
  SummaryStats s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = Quantile(values, 0.5);
  s.q1 = Quantile(values, 0.25);
  s.q3 = Quantile(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::string InitModeName(const InitMode& init) {
  switch (init.index()) {
    case 0: return "fixed";
    case 1: return "random";
    default: return "seen";
  }
}

namespace {

void CheckInit(const InitMode& init) {
  if (const auto* demos = std::get_if<SampleFromDemos>(&init); demos && demos->starts.empty()) {
    throw PreconditionError("seen-start evaluation needs a demonstration pool");
  }
}

}  // namespace

EvalReport Evaluate(const Actor& actor, const ScenarioConfig& config, int episodes,
                    const InitMode& init, std::uint64_t seed, int jobs) {
  config.Validate();
  if (episodes < 1) throw PreconditionError("evaluation needs at least one episode");
  CheckInit(init);
  const int n = config.n_agents;
  EvalReport report;
  report.init_mode = InitModeName(init);
  report.episodes = episodes;
  report.n_agents = n;
  report.episode_rewards.assign(episodes, 0.0);
  report.agent_rewards.assign(episodes, std::vector<double>(n, 0.0));
  ParallelFor(static_cast<std::size_t>(episodes), jobs, [&](std::size_t i) {
    Rng env_rng = MakeRng(seed, "eval-env", i);
    Rng policy_rng = MakeRng(seed, "eval-policy", i);
    const EpisodeRollout ep = RunEpisode(actor, config, init, env_rng, policy_rng);
    double total = 0.0;
    for (const auto& step : ep.rewards) {
      total += std::accumulate(step.begin(), step.end(), 0.0) / static_cast<double>(n);
      for (int a = 0; a < n; ++a) report.agent_rewards[i][a] += step[a];
    }
    report.episode_rewards[i] = total;
  });
  report.summary = Summarize(report.episode_rewards);
  return report;
}

EvalReport Normalize(const EvalReport& report, double expert_mean, double random_mean) {
  if (!(expert_mean != random_mean)) {
    throw PreconditionError("normalization anchors must differ");
  }
  const double scale = expert_mean - random_mean;
  EvalReport out = report;
  for (double& v : out.episode_rewards) v = (v - random_mean) / scale;
  for (auto& row : out.agent_rewards) {
    for (double& v : row) v = (v - random_mean) / scale;
  }
  out.summary = Summarize(out.episode_rewards);
  out.expert_anchor = expert_mean;
  out.random_anchor = random_mean;
  return out;
}

long CoverageTrace::TotalVisits() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

int CoverageTrace::DistinctCells() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](long c) { return c > 0; }));
}

CoverageTrace Coverage(const Actor& actor, const ScenarioConfig& config, int episodes,
                       const InitMode& init, std::uint64_t seed) {
  config.Validate();
  if (episodes < 1) throw PreconditionError("coverage needs at least one episode");
  CheckInit(init);
  const int n = config.n_agents;
  const int g = config.grid_size;
  CoverageTrace trace;
  trace.grid_size = g;
  trace.n_agents = n;
  trace.episode_length = config.episode_length;
  trace.counts.assign(static_cast<std::size_t>(g) * g, 0);
  for (int e = 0; e < episodes; ++e) {
    Rng env_rng = MakeRng(seed, "coverage-env", static_cast<std::uint64_t>(e));
    Rng policy_rng = MakeRng(seed, "coverage-policy", static_cast<std::uint64_t>(e));
    const EpisodeRollout ep = RunEpisode(actor, config, init, env_rng, policy_rng);
    std::vector<std::vector<Cell>> paths(n);
    for (int t = 0; t < config.episode_length; ++t) {
      const Positions& cells = t == 0 ? ep.initial.agents : ep.states[t - 1].agents;
      for (int a = 0; a < n; ++a) {
        paths[a].push_back(cells[a]);
        ++trace.counts[static_cast<std::size_t>(cells[a].y) * g + cells[a].x];
      }
    }
    trace.paths.push_back(std::move(paths));
  }
  return trace;
}

void WriteEvalCsv(std::ostream& out, const EvalReport& report) {
  out << "episode,episode_reward";
  for (int a = 0; a < report.n_agents; ++a) out << ",agent_" << a;
  out << '\n';
  for (int e = 0; e < report.episodes; ++e) {
    out << e << ',' << internal::FormatReal(report.episode_rewards[e]);
    for (double v : report.agent_rewards[e]) out << ',' << internal::FormatReal(v);
    out << '\n';
  }
}

std::string EvalSummaryJson(const EvalReport& report) {
  const SummaryStats& s = report.summary;
  json j = {{"init_mode", report.init_mode},
            {"episodes", report.episodes},
            {"n_agents", report.n_agents},
            {"summary",
             {{"mean", s.mean}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3},
              {"min", s.min}, {"max", s.max}}}};
  std::vector<double> agent_means(report.n_agents, 0.0);
  for (const auto& row : report.agent_rewards) {
    for (int a = 0; a < report.n_agents; ++a) agent_means[a] += row[a] / report.episodes;
  }
  j["agent_mean"] = agent_means;
  if (report.expert_anchor) j["expert_anchor"] = *report.expert_anchor;
  if (report.random_anchor) j["random_anchor"] = *report.random_anchor;
  return j.dump(2) + "\n";
}

double SummaryMeanFromJson(const std::string& text) {
  try {
    return json::parse(text).at("summary").at("mean").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed evaluation summary: ") + e.what());
  }
}

void WriteCoverageCsv(std::ostream& out, const CoverageTrace& trace) {
  out << "episode,agent,step,x,y\n";
  for (std::size_t e = 0; e < trace.paths.size(); ++e) {
    for (std::size_t a = 0; a < trace.paths[e].size(); ++a) {
      for (std::size_t t = 0; t < trace.paths[e][a].size(); ++t) {
        const Cell c = trace.paths[e][a][t];
        out << e << ',' << a << ',' << t << ',' << c.x << ',' << c.y << '\n';
      }
    }
  }
}

void WriteCoverageGridCsv(std::ostream& out, const CoverageTrace& trace) {
  out << "x,y,count\n";
  for (int y = 0; y < trace.grid_size; ++y) {
    for (int x = 0; x < trace.grid_size; ++x) {
      out << x << ',' << y << ',' << trace.counts[static_cast<std::size_t>(y) * trace.grid_size + x]
          << '\n';
    }
  }
}

}  // namespace swarmrecon
