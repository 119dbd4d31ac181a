#ifndef SWARMRECON_TESTS_SUPPORT_ORACLES_H_
#define SWARMRECON_TESTS_SUPPORT_ORACLES_H_

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"
#include "swarmrecon/rng.h"

namespace swarmrecon::oracles {

inline RolloutBuffer RandomBuffer(int agents, int steps, Rng& rng, bool random_dones) {
  RolloutBuffer b(agents);
  for (AgentRollout& a : b.agents) {
    for (int t = 0; t < steps; ++t) {
      a.observations.push_back({Uniform01(rng), Uniform01(rng)});
      a.actions.push_back(static_cast<int>(UniformIndex(rng, kNumActions)));
      a.log_probs.push_back(std::log(0.2));
      a.rewards.push_back(StandardNormal(rng));
      a.values.push_back(StandardNormal(rng));
      a.dones.push_back(t + 1 == steps || (random_dones && Uniform01(rng) < 0.2));
    }
    a.bootstrap_value = StandardNormal(rng);
  }
  return b;
}

// A_t = sum_k (gamma lambda)^k prod_{j<k} (1 - done_{t+j}) delta_{t+k}.
inline std::vector<double> BruteForceGae(const AgentRollout& a, double gamma, double lambda) {
  const std::size_t n = a.rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? a.values[t + 1] : a.bootstrap_value;
    delta[t] = a.rewards[t] + gamma * next * (a.dones[t] ? 0.0 : 1.0) - a.values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; t + k < n; ++k) {
      double weight = std::pow(gamma * lambda, static_cast<double>(k));
      for (std::size_t j = 0; j < k; ++j) weight *= a.dones[t + j] ? 0.0 : 1.0;
      adv[t] += weight * delta[t + k];
    }
  }
  return adv;
}

// Largest |GAE - brute force| over `trials` random 5-step, 2-agent buffers,
// advantages and returns alike.
inline double GaeOracleMaxError(int trials, Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    PpoConfig cfg;
    cfg.gamma = 0.999 * Uniform01(rng);
    cfg.gae_lambda = Uniform01(rng);
    const RolloutBuffer b = RandomBuffer(2, 5, rng, trial % 2 == 1);
    const GaeResult g = ComputeGae(b, cfg);
    for (std::size_t i = 0; i < b.agents.size(); ++i) {
      const auto expected = BruteForceGae(b.agents[i], cfg.gamma, cfg.gae_lambda);
      for (std::size_t t = 0; t < expected.size(); ++t) {
        worst = std::max(worst, std::abs(g.advantages[i][t] - expected[t]));
        worst = std::max(worst, std::abs(g.returns[i][t] - expected[t] - b.agents[i].values[t]));
      }
    }
  }
  return worst;
}

inline Eigen::VectorXd RandomVector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = StandardNormal(rng);
  return v;
}

// Network with 1..3 layers of width 1..16, head cycling through all kinds and
// N(0, 0.25) parameters.
inline Mlp RandomNetwork(int trial, Rng& rng) {
  const Head heads[] = {Head::kLinear, Head::kSoftmax, Head::kSigmoid};
  const int layers = 1 + static_cast<int>(UniformIndex(rng, 3));
  std::vector<int> sizes;
  for (int l = 0; l <= layers; ++l) sizes.push_back(1 + static_cast<int>(UniformIndex(rng, 16)));
  const Head head = heads[trial % 3];
  if (head == Head::kSigmoid) sizes.back() = 1;
  Mlp m(sizes, head);
  for (Eigen::Index i = 0; i < m.num_params(); ++i) m.params()[i] = 0.5 * StandardNormal(rng);
  return m;
}

// Central differences of <w, m(x)> with respect to every parameter.
inline Eigen::VectorXd FiniteDifferenceGradient(const Mlp& m, const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& w, double h = 1e-6) {
  Eigen::VectorXd numeric(m.num_params());
  for (Eigen::Index i = 0; i < m.num_params(); ++i) {
    Mlp plus = m, minus = m;
    plus.params()[i] += h;
    minus.params()[i] -= h;
    numeric[i] = (w.dot(plus.Forward(x)) - w.dot(minus.Forward(x))) / (2 * h);
  }
  return numeric;
}

// max(|a - b| / max(|a|, |b|, floor)) over components.
inline double MaxRelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               double floor = 1e-3) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace swarmrecon::oracles

#endif  // SWARMRECON_TESTS_SUPPORT_ORACLES_H_
