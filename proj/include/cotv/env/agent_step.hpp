#ifndef COTV_ENV_AGENT_STEP_HPP_
#define COTV_ENV_AGENT_STEP_HPP_

#include <cstdint>
#include <vector>

namespace cotv {

enum class AgentType { kTrafficLight, kCav };

// One transition of one agent: the observation it acted on, what it did
// and the reward measured on the post-transition state.
struct AgentStep {
  AgentType type = AgentType::kTrafficLight;
  // Intersection id for lights, vehicle id for CAVs.
  std::uint64_t agent = 0;
  std::vector<double> observation;
  // 0/1 for lights; the unclipped Gaussian sample for CAVs.
  double action = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  // Closes the agent's trajectory segment: episode end or CAV retirement.
  bool done = false;
  // Value of the state after a segment that was cut by the horizon rather
  // than ended; zero for genuine ends.
  double bootstrap_value = 0.0;
  int timestep = 0;
};

}  // namespace cotv

#endif  // COTV_ENV_AGENT_STEP_HPP_
