#include "cotv/env/agents.hpp"

#include <algorithm>
#include <cmath>

#include "cotv/error.hpp"

namespace cotv {

namespace {

double norm_accel(double a) { return std::clamp(a / kAccelNorm, -1.0, 1.0); }

double signal_code(Signal s) {
  switch (s) {
    case Signal::kGreen:
      return 1.0;
    case Signal::kYellow:
      return 0.5;
    case Signal::kRed:
      return 0.0;
  }
  return 0.0;
}

// Front-most CAV on a road, if any.
const Vehicle* closest_cav(const Simulation& sim, RoadId road) {
  for (std::size_t idx : sim.on_road(road)) {
    const Vehicle& v = sim.at(idx);
    if (v.kind == VehicleKind::kCav) return &v;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(CooperationMode mode) {
  switch (mode) {
    case CooperationMode::kCoTV:
      return "cotv";
    case CooperationMode::kCoTVStar:
      return "cotv-star";
    case CooperationMode::kICoTV:
      return "i-cotv";
    case CooperationMode::kMCoTV:
      return "m-cotv";
  }
  return "unknown";
}

int max_road_capacity(const RoadNetwork& network, double vehicle_length,
                      double min_gap) {
  const double space = vehicle_length + min_gap;
  if (!(space > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "vehicle space must be > 0");
  }
  // Small tolerance so 300 / 7.5 does not round down to 39.
  const int c = static_cast<int>(std::floor(network.longest_road() / space + 1e-9));
  return std::max(c, 1);
}

std::size_t tl_observation_size(const RoadNetwork& network,
                                IntersectionId light, CooperationMode mode) {
  const Intersection& x = network.intersection(light);
  const std::size_t in = x.incoming.size();
  std::size_t n = 1 + in + x.outgoing.size() + in * (3 + in);
  if (mode == CooperationMode::kMCoTV) n += in;
  return n;
}

std::size_t cav_observation_size(CooperationMode mode) {
  return mode == CooperationMode::kMCoTV ? 8 : 7;
}

std::vector<VehicleId> select_cav_agents(const Simulation& sim,
                                         CooperationMode mode) {
  std::vector<VehicleId> out;
  for (const Intersection& x : sim.network().intersections()) {
    for (RoadId road : x.incoming) {
      if (mode == CooperationMode::kCoTVStar) {
        for (std::size_t idx : sim.on_road(road)) {
          const Vehicle& v = sim.at(idx);
          if (v.kind == VehicleKind::kCav) out.push_back(v.id);
        }
      } else if (const Vehicle* v = closest_cav(sim, road)) {
        out.push_back(v->id);
      }
    }
  }
  return out;
}

std::vector<double> tl_observation(const Simulation& sim, IntersectionId light,
                                   CooperationMode mode, int capacity,
                                   const ExchangeMemory& memory) {
  const RoadNetwork& net = sim.network();
  const Intersection& x = net.intersection(light);
  const TrafficLight& tl = sim.light(light);
  const double c = static_cast<double>(capacity);
  std::vector<double> obs;
  obs.reserve(tl_observation_size(net, light, mode));
  obs.push_back(static_cast<double>(tl.current) /
                static_cast<double>(tl.phases.size()));
  for (RoadId r : x.incoming) obs.push_back(sim.on_road(r).size() / c);
  for (RoadId r : x.outgoing) obs.push_back(sim.on_road(r).size() / c);

  const std::size_t in = x.incoming.size();
  for (std::size_t slot = 0; slot < in; ++slot) {
    const RoadId r = x.incoming[slot];
    const Road& road = net.road(r);
    if (mode == CooperationMode::kICoTV) {
      obs.insert(obs.end(), 3 + in, 0.0);
      continue;
    }
    const auto& list = sim.on_road(r);
    if (list.empty()) {
      obs.insert(obs.end(), {0.0, 0.0, 1.0});
    } else {
      const Vehicle& v = sim.at(list.front());
      obs.push_back(v.speed / road.speed_limit);
      obs.push_back(norm_accel(v.accel));
      obs.push_back((road.length - v.position) / road.length);
    }
    for (std::size_t k = 0; k < in; ++k) obs.push_back(k == slot ? 1.0 : 0.0);
  }

  if (mode == CooperationMode::kMCoTV) {
    for (RoadId r : x.incoming) {
      double prev = 0.0;
      if (const Vehicle* v = closest_cav(sim, r)) {
        if (auto it = memory.vehicle_commands.find(v->id);
            it != memory.vehicle_commands.end()) {
          prev = norm_accel(it->second);
        }
      }
      obs.push_back(prev);
    }
  }
  return obs;
}

std::vector<double> cav_observation(const Simulation& sim, VehicleId id,
                                    CooperationMode mode,
                                    const ExchangeMemory& memory) {
  const Vehicle* v = sim.find(id);
  if (v == nullptr) {
    throw Error(ErrorCategory::kInvalidArgument,
                "no active vehicle " + std::to_string(id));
  }
  const Road& road = sim.network().road(v->road());
  const double vmax = road.speed_limit;
  std::vector<double> obs;
  obs.reserve(cav_observation_size(mode));
  obs.push_back(v->speed / vmax);
  obs.push_back(norm_accel(v->accel));
  if (const Vehicle* lead = sim.predecessor(*v)) {
    obs.push_back(lead->speed / vmax);
    obs.push_back(norm_accel(lead->accel));
    obs.push_back((lead->position - lead->length - v->position) / road.length);
  } else {
    obs.insert(obs.end(), {1.0, 0.0, 1.0});
  }
  obs.push_back((road.length - v->position) / road.length);
  double signal = 1.0;
  if (road.approach_intersection) signal = signal_code(sim.signal_for(road.id));
  obs.push_back(mode == CooperationMode::kICoTV ? 0.0 : signal);
  if (mode == CooperationMode::kMCoTV) {
    double prev = 0.0;
    if (road.approach_intersection &&
        *road.approach_intersection < memory.light_actions.size()) {
      prev = memory.light_actions[*road.approach_intersection];
    }
    obs.push_back(prev);
  }
  return obs;
}

double tl_reward(const Simulation& sim, IntersectionId light, int capacity) {
  const Intersection& x = sim.network().intersection(light);
  double n_in = 0.0;
  double n_out = 0.0;
  for (RoadId r : x.incoming) n_in += static_cast<double>(sim.on_road(r).size());
  for (RoadId r : x.outgoing) n_out += static_cast<double>(sim.on_road(r).size());
  return -(n_in - n_out) / static_cast<double>(capacity);
}

double cav_reward(const Simulation& sim, VehicleId id, double a_star) {
  const Vehicle* v = sim.find(id);
  if (v == nullptr) {
    throw Error(ErrorCategory::kInvalidArgument,
                "no active vehicle " + std::to_string(id));
  }
  const Road& road = sim.network().road(v->road());
  const double vmax = road.speed_limit;
  const auto& k = sim.on_road(road.id);
  double speed_gap = 0.0;
  double accel_sq = 0.0;
  for (std::size_t idx : k) {
    const Vehicle& u = sim.at(idx);
    speed_gap += vmax - std::min(u.speed, vmax);
    const double a = std::max(u.accel, 0.0) / a_star;
    accel_sq += a * a;
  }
  const double n = static_cast<double>(k.size());
  return -speed_gap / (vmax * n) - std::sqrt(accel_sq) / n;
}

}  // namespace cotv
