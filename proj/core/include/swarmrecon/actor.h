#ifndef SWARMRECON_ACTOR_H_
#define SWARMRECON_ACTOR_H_

#include "swarmrecon/ppo.h"
#include "swarmrecon/rng.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon {

// Anything that maps an agent's observation to an action.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual Action Act(int agent_index, const Observation& obs, Rng& rng) const = 0;
};

class PolicyActor : public Actor {
 public:
  PolicyActor(const SharedPolicy& policy, ActMode mode)
      : policy_(&policy), mode_(mode) {}
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override;

 private:
  const SharedPolicy* policy_;
  ActMode mode_;
};

// Uniform over all actions: the epsilon = 1 expert.
class RandomActor : public Actor {
 public:
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override;
};

class ConstantActor : public Actor {
 public:
  explicit ConstantActor(Action action) : action_(action) {}
  Action Act(int, const Observation&, Rng&) const override { return action_; }

 private:
  Action action_;
};

// With probability epsilon per call, replaces the base action by a uniform
// random one. Both draws come from the acting stream.
class EpsilonActor : public Actor {
 public:
  EpsilonActor(const Actor& base, double epsilon);
  Action Act(int agent_index, const Observation& obs, Rng& rng) const override;

 private:
  const Actor* base_;
  double epsilon_;
};

// Plays one episode. log_probs and values of the result stay empty.
EpisodeRollout RunEpisode(const Actor& actor, const ScenarioConfig& config,
                          const InitMode& init, Rng& env_rng, Rng& policy_rng);

}  // namespace swarmrecon

#endif  // SWARMRECON_ACTOR_H_
