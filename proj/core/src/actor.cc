#include "swarmrecon/actor.h"

#include "swarmrecon/error.h"

namespace swarmrecon {

Action PolicyActor::Act(int, const Observation& obs, Rng& rng) const {
  return swarmrecon::Act(*policy_, obs, mode_, rng).action;
}

Action RandomActor::Act(int, const Observation&, Rng& rng) const {
  return static_cast<Action>(UniformIndex(rng, kNumActions));
}

EpsilonActor::EpsilonActor(const Actor& base, double epsilon)
    : base_(&base), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw PreconditionError("epsilon must lie in [0, 1]");
  }
}

Action EpsilonActor::Act(int agent_index, const Observation& obs, Rng& rng) const {
  const Action chosen = base_->Act(agent_index, obs, rng);
  const double u = Uniform01(rng);
  const auto random = static_cast<Action>(UniformIndex(rng, kNumActions));
  return u < epsilon_ ? random : chosen;
}

EpisodeRollout RunEpisode(const Actor& actor, const ScenarioConfig& config,
                          const InitMode& init, Rng& env_rng, Rng& policy_rng) {
  EpisodeRollout ep;
  ep.initial = Reset(config, init, env_rng);
  const int n = config.n_agents;
  GridState state = ep.initial;
  std::vector<Action> joint(n);
  for (int t = 0; t < config.episode_length; ++t) {
    std::vector<Observation> obs(n);
    for (int i = 0; i < n; ++i) {
      obs[i] = Observe(state, i, config);
      joint[i] = actor.Act(i, obs[i], policy_rng);
    }
    StepResult step = Step(state, joint, config);
    ep.observations.push_back(std::move(obs));
    ep.actions.push_back(joint);
    ep.rewards.push_back(std::move(step.rewards));
    state = std::move(step.next_state);
    ep.states.push_back(state);
  }
  return ep;
}

}  // namespace swarmrecon
