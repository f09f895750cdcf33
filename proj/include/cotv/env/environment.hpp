#ifndef COTV_ENV_ENVIRONMENT_HPP_
#define COTV_ENV_ENVIRONMENT_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "cotv/control/baselines.hpp"
#include "cotv/env/agent_step.hpp"
#include "cotv/env/agents.hpp"
#include "cotv/rl/actor_critic.hpp"
#include "cotv/sim/simulation.hpp"

namespace cotv {

enum class LightControl { kLearned, kStatic, kActuated, kMaxPressure };
enum class VehicleControl { kNone, kLearned, kGlosa };

std::string_view to_string(LightControl c);
std::string_view to_string(VehicleControl c);

// Reward given to a CAV agent removed by a collision during its step; the
// lower bound of the regular CAV reward.
inline constexpr double kCollisionReward = -2.0;

struct EnvConfig {
  CooperationMode mode = CooperationMode::kCoTV;
  LightControl lights = LightControl::kLearned;
  VehicleControl vehicles = VehicleControl::kLearned;
  double a_star = kDefaultAStar;
  StaticPlan static_plan;
  ActuatedConfig actuated;
  SimConfig sim;

  void validate() const;
};

// Both agent types share one parameter set each.
struct AgentPolicies {
  const ActorCritic* lights = nullptr;
  const ActorCritic* vehicles = nullptr;
};

// One episode: a simulation plus agent bookkeeping. Owns its state; run
// independent episodes in independent instances.
class Environment {
 public:
  Environment(std::shared_ptr<const RoadNetwork> network,
              const ScenarioSpec& scenario, EnvConfig config,
              std::uint64_t episode_seed);

  // Observe, act, transition, reward. Returns one record per learned
  // agent. With `greedy`, actions are distribution modes instead of samples.
  std::vector<AgentStep> step(const AgentPolicies& policies,
                              std::mt19937_64& rng, bool greedy = false);

  bool done() const { return steps_ >= horizon_; }
  int steps() const { return steps_; }
  int horizon() const { return horizon_; }
  int capacity() const { return capacity_; }
  const EnvConfig& config() const { return config_; }

  const Simulation& sim() const { return sim_; }
  Simulation& mutable_sim() { return sim_; }

  std::size_t tl_observation_size() const;
  std::size_t cav_observation_size() const;

 private:
  EnvConfig config_;
  Simulation sim_;
  int horizon_ = 0;
  int steps_ = 0;
  int capacity_ = 1;
  ExchangeMemory memory_;
  std::vector<ActuatedState> actuated_;
};

// Observation lengths for a network and mode; throws when intersections
// disagree (one shared light policy needs one input size).
std::size_t shared_tl_observation_size(const RoadNetwork& network,
                                       CooperationMode mode);

}  // namespace cotv

#endif  // COTV_ENV_ENVIRONMENT_HPP_
