// Internal JSON conversions shared by checkpoint, pool and manifest code.
#ifndef SWARMRECON_SRC_JSON_IO_H_
#define SWARMRECON_SRC_JSON_IO_H_

#include <json.hpp>

#include <cstdio>
#include <string>

#include "swarmrecon/error.h"
#include "swarmrecon/mlp.h"
#include "swarmrecon/ppo.h"
#include "swarmrecon/scenario.h"

namespace swarmrecon::internal {

using nlohmann::json;

inline std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double ParseReal(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("malformed decimal '" + s + "'");
  }
  if (used != s.size()) throw FormatError("malformed decimal '" + s + "'");
  return v;
}

inline json CellsToJson(const Positions& cells) {
  json out = json::array();
  for (const Cell& c : cells) out.push_back({c.x, c.y});
  return out;
}

inline Positions CellsFromJson(const json& j) {
  Positions out;
  for (const json& c : j) {
    if (!c.is_array() || c.size() != 2) throw FormatError("cell must be [x, y]");
    out.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  }
  return out;
}

inline json ConfigToJson(const ScenarioConfig& c) {
  return {{"kind", std::string(ScenarioName(c.kind))},
          {"grid_size", c.grid_size},
          {"n_agents", c.n_agents},
          {"fixed_entities", CellsToJson(c.fixed_entities)},
          {"episode_length", c.episode_length},
          {"perception_range", c.perception_range},
          {"reward_c", c.reward_c},
          {"aggregation_threshold_t", c.aggregation_threshold_t},
          {"exploration_penalty", c.exploration_penalty},
          {"aggregation_include_fixed", c.aggregation_include_fixed}};
}

inline ScenarioConfig ConfigFromJson(const json& j) {
  const auto kind = ParseScenarioKind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown scenario kind in JSON");
  ScenarioConfig c = DefaultConfig(*kind);
  c.grid_size = j.at("grid_size").get<int>();
  c.n_agents = j.at("n_agents").get<int>();
  c.fixed_entities = CellsFromJson(j.at("fixed_entities"));
  c.episode_length = j.at("episode_length").get<int>();
  c.perception_range = j.at("perception_range").get<int>();
  c.reward_c = j.at("reward_c").get<double>();
  c.aggregation_threshold_t = j.at("aggregation_threshold_t").get<double>();
  c.exploration_penalty = j.at("exploration_penalty").get<double>();
  c.aggregation_include_fixed = j.value("aggregation_include_fixed", false);
  return c;
}

inline json PpoConfigToJson(const PpoConfig& p) {
  return {{"gamma", p.gamma},           {"gae_lambda", p.gae_lambda},
          {"clip", p.clip},             {"epochs", p.epochs},
          {"entropy_coef", p.entropy_coef}, {"value_coef", p.value_coef},
          {"actor_lr", p.actor_lr},     {"critic_lr", p.critic_lr},
          {"max_grad_norm", p.max_grad_norm}, {"hidden", p.hidden}};
}

inline json MlpToJson(const Mlp& mlp) {
  const Eigen::VectorXd& p = mlp.params();
  return {{"layer_sizes", mlp.layer_sizes()},
          {"head", std::string(HeadName(mlp.head()))},
          {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

inline Mlp MlpFromJson(const json& j) {
  const auto head = ParseHead(j.at("head").get<std::string>());
  if (!head) throw FormatError("unknown head kind");
  Mlp mlp(j.at("layer_sizes").get<std::vector<int>>(), *head);
  const auto values = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != mlp.num_params()) {
    throw FormatError("parameter count does not match layer sizes");
  }
  mlp.set_params(Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size())));
  if (!mlp.AllFinite()) throw FormatError("non-finite parameters in checkpoint");
  return mlp;
}

inline json PolicyToJson(const SharedPolicy& p) {
  return {{"actor", MlpToJson(p.actor)}, {"critic", MlpToJson(p.critic)}};
}

inline SharedPolicy PolicyFromJson(const json& j) {
  return {MlpFromJson(j.at("actor")), MlpFromJson(j.at("critic"))};
}

}  // namespace swarmrecon::internal

#endif  // SWARMRECON_SRC_JSON_IO_H_
