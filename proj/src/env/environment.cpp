#include "cotv/env/environment.hpp"

#include <algorithm>

#include "cotv/error.hpp"

namespace cotv {

std::string_view to_string(LightControl c) {
  switch (c) {
    case LightControl::kLearned:
      return "learned";
    case LightControl::kStatic:
      return "static";
    case LightControl::kActuated:
      return "actuated";
    case LightControl::kMaxPressure:
      return "max-pressure";
  }
  return "unknown";
}

std::string_view to_string(VehicleControl c) {
  switch (c) {
    case VehicleControl::kNone:
      return "none";
    case VehicleControl::kLearned:
      return "learned";
    case VehicleControl::kGlosa:
      return "glosa";
  }
  return "unknown";
}

void EnvConfig::validate() const {
  if (vehicles == VehicleControl::kGlosa && lights != LightControl::kStatic &&
      lights != LightControl::kActuated) {
    throw Error(ErrorCategory::kConfig,
                "GLOSA needs a static or actuated signal schedule");
  }
  if (!(a_star > 0.0)) throw Error(ErrorCategory::kConfig, "a_star must be > 0");
  if (!(static_plan.green >= sim.min_green)) {
    throw Error(ErrorCategory::kConfig, "static green shorter than min_green");
  }
  if (lights == LightControl::kActuated) actuated.validate(sim.min_green);
}

std::size_t shared_tl_observation_size(const RoadNetwork& network,
                                       CooperationMode mode) {
  std::size_t size = 0;
  for (const Intersection& x : network.intersections()) {
    const std::size_t n = tl_observation_size(network, x.id, mode);
    if (size != 0 && n != size) {
      throw Error(ErrorCategory::kShapeMismatch,
                  "intersections need equal observation sizes to share a policy");
    }
    size = n;
  }
  return size;
}

Environment::Environment(std::shared_ptr<const RoadNetwork> network,
                         const ScenarioSpec& scenario, EnvConfig config,
                         std::uint64_t episode_seed)
    : config_(std::move(config)),
      sim_(network,
           assign_vehicle_kinds(*network, scenario.flows,
                                scenario.penetration_rate, episode_seed),
           config_.sim),
      horizon_(scenario.horizon) {
  config_.validate();
  scenario.validate();
  capacity_ = max_road_capacity(*network, config_.sim.vehicle_length,
                                config_.sim.min_gap);
  memory_.light_actions.assign(network->intersections().size(), 0);
  actuated_.resize(network->intersections().size());
}

std::size_t Environment::tl_observation_size() const {
  return shared_tl_observation_size(sim_.network(), config_.mode);
}

std::size_t Environment::cav_observation_size() const {
  return cotv::cav_observation_size(config_.mode);
}

std::vector<AgentStep> Environment::step(const AgentPolicies& policies,
                                         std::mt19937_64& rng, bool greedy) {
  if (done()) throw Error(ErrorCategory::kSimulation, "episode already ended");
  const bool learned_lights = config_.lights == LightControl::kLearned;
  const bool learned_vehicles = config_.vehicles == VehicleControl::kLearned;
  if (learned_lights && policies.lights == nullptr) {
    throw Error(ErrorCategory::kInvalidArgument, "missing light policy");
  }
  if (learned_vehicles && policies.vehicles == nullptr) {
    throw Error(ErrorCategory::kInvalidArgument, "missing vehicle policy");
  }
  const int t = steps_;
  std::vector<AgentStep> records;

  auto act = [&](const ActorCritic& net, AgentStep& s) {
    PolicyOutput po = net.forward(s.observation);
    s.action = greedy ? po.dist.mode() : po.dist.sample(rng);
    s.log_prob = po.dist.log_prob(s.action);
    s.value = po.value;
    s.timestep = t;
  };

  std::map<IntersectionId, int> tl_actions;
  for (const TrafficLight& light : sim_.lights()) {
    const IntersectionId i = light.intersection;
    int action = 0;
    switch (config_.lights) {
      case LightControl::kLearned: {
        AgentStep s;
        s.type = AgentType::kTrafficLight;
        s.agent = i;
        s.observation = tl_observation(sim_, i, config_.mode, capacity_, memory_);
        act(*policies.lights, s);
        action = s.action > 0.5 ? 1 : 0;
        records.push_back(std::move(s));
        break;
      }
      case LightControl::kStatic:
        action = static_tick(light, config_.static_plan);
        break;
      case LightControl::kActuated:
        action = actuated_tick(light, sim_, config_.actuated, actuated_[i]);
        break;
      case LightControl::kMaxPressure:
        action = max_pressure_tick(light, sim_, light.min_green);
        break;
    }
    tl_actions[i] = action;
  }
  const std::size_t n_light_records = records.size();

  std::map<VehicleId, double> commands;
  if (learned_vehicles) {
    for (VehicleId id : select_cav_agents(sim_, config_.mode)) {
      AgentStep s;
      s.type = AgentType::kCav;
      s.agent = id;
      s.observation = cav_observation(sim_, id, config_.mode, memory_);
      act(*policies.vehicles, s);
      commands[id] =
          std::clamp(s.action, -kCommandAccelLimit, kCommandAccelLimit);
      records.push_back(std::move(s));
    }
  } else if (config_.vehicles == VehicleControl::kGlosa) {
    const double green = config_.lights == LightControl::kActuated
                             ? config_.actuated.max_green
                             : config_.static_plan.green;
    for (const Vehicle& v : sim_.vehicles()) {
      if (v.kind != VehicleKind::kCav || v.on_last_road()) continue;
      const Road& road = sim_.network().road(v.road());
      if (!road.approach_intersection) continue;
      const SignalForecast f = forecast_signal(
          sim_.light(*road.approach_intersection), road.id, green);
      const double idm = sim_.model_accel(v);
      const double advice = glosa_advice(v.speed, road.length - v.position, f,
                                         road.speed_limit, idm);
      commands[v.id] = std::min(advice, idm);
    }
  }

  sim_.step(tl_actions, commands);
  ++steps_;
  const bool end = done();

  for (const auto& [i, a] : tl_actions) memory_.light_actions[i] = a;
  memory_.vehicle_commands = commands;

  for (std::size_t k = 0; k < n_light_records; ++k) {
    AgentStep& s = records[k];
    s.reward = tl_reward(sim_, s.agent, capacity_);
    s.done = end;
    if (end) {
      s.bootstrap_value =
          policies.lights
              ->forward(tl_observation(sim_, s.agent, config_.mode, capacity_,
                                       memory_))
              .value;
    }
  }
  if (learned_vehicles && records.size() > n_light_records) {
    std::vector<VehicleId> next = select_cav_agents(sim_, config_.mode);
    std::sort(next.begin(), next.end());
    for (std::size_t k = n_light_records; k < records.size(); ++k) {
      AgentStep& s = records[k];
      if (sim_.find(s.agent) == nullptr) {
        s.reward = kCollisionReward;
        s.done = true;
        continue;
      }
      s.reward = cav_reward(sim_, s.agent, config_.a_star);
      const bool retired = !std::binary_search(next.begin(), next.end(), s.agent);
      s.done = end || retired;
      if (end && !retired) {
        s.bootstrap_value =
            policies.vehicles
                ->forward(cav_observation(sim_, s.agent, config_.mode, memory_))
                .value;
      }
    }
  }
  return records;
}

}  // namespace cotv
