#include "cotv/control/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "cotv/error.hpp"

namespace cotv {

void ActuatedConfig::validate(double min_green) const {
  if (!(max_green > min_green)) {
    throw Error(ErrorCategory::kConfig, "actuated max_green must exceed min_green");
  }
  if (!(gap_threshold > 0.0) || !(detection_distance > 0.0)) {
    throw Error(ErrorCategory::kConfig,
                "actuated gap threshold and detection distance must be > 0");
  }
}

int static_tick(const TrafficLight& light, const StaticPlan& plan) {
  if (!light.in_green()) return 0;
  return light.time_in_phase >= plan.green ? 1 : 0;
}

int actuated_tick(const TrafficLight& light, const Simulation& sim,
                  const ActuatedConfig& cfg, ActuatedState& state) {
  if (!light.in_green()) {
    state.since_detection = 0.0;
    return 0;
  }
  if (light.time_in_phase == 0.0) state.since_detection = 0.0;
  bool detected = false;
  for (RoadId r : light.phase().served) {
    const Road& road = sim.network().road(r);
    for (std::size_t idx : sim.on_road(r)) {
      if (road.length - sim.at(idx).position <= cfg.detection_distance) {
        detected = true;
        break;
      }
    }
  }
  if (detected) {
    state.since_detection = 0.0;
  } else if (light.time_in_phase > 0.0) {
    state.since_detection += 1.0;
  }
  if (light.time_in_phase < light.min_green) return 0;
  if (light.time_in_phase >= cfg.max_green) return 1;
  return state.since_detection >= cfg.gap_threshold ? 1 : 0;
}

double phase_pressure(const Simulation& sim, const TrafficLight& light,
                      std::size_t phase) {
  const Intersection& x = sim.network().intersection(light.intersection);
  double pressure = 0.0;
  for (RoadId r : light.phases.at(phase).served) {
    pressure += static_cast<double>(sim.on_road(r).size());
    auto it = std::find(x.incoming.begin(), x.incoming.end(), r);
    if (!x.through.empty() && it != x.incoming.end()) {
      const RoadId out = x.through[static_cast<std::size_t>(it - x.incoming.begin())];
      pressure -= static_cast<double>(sim.on_road(out).size());
    }
  }
  return pressure;
}

int max_pressure_tick(const TrafficLight& light, const Simulation& sim,
                      double min_green) {
  if (!light.in_green() || light.time_in_phase < min_green) return 0;
  // The next green follows the yellow of the current phase.
  std::size_t next = light.next_index();
  while (light.phases[next].kind != PhaseKind::kGreen) {
    next = (next + 1) % light.phases.size();
  }
  if (next == light.current) return 0;
  return phase_pressure(sim, light, next) > phase_pressure(sim, light, light.current)
             ? 1
             : 0;
}

SignalForecast forecast_signal(const TrafficLight& light, RoadId road,
                               double green_duration) {
  auto duration = [&](std::size_t i) {
    const Phase& p = light.phases[i];
    return p.kind == PhaseKind::kGreen ? green_duration : p.duration;
  };
  auto serves_green = [&](std::size_t i) {
    const Phase& p = light.phases[i];
    return p.kind == PhaseKind::kGreen &&
           std::find(p.served.begin(), p.served.end(), road) != p.served.end();
  };
  SignalForecast f;
  const double remaining =
      std::max(duration(light.current) - light.time_in_phase, 0.0);
  f.green_now = serves_green(light.current);
  if (f.green_now) f.green_remaining = remaining;
  double t = remaining;
  std::size_t i = light.next_index();
  for (std::size_t guard = 0; guard < light.phases.size(); ++guard) {
    if (serves_green(i)) break;
    t += duration(i);
    i = (i + 1) % light.phases.size();
  }
  f.time_to_green = t;
  return f;
}

double arrival_time(double speed, double dist, double speed_limit,
                    double accel) {
  if (dist <= 0.0) return 0.0;
  // Accelerate at `accel` up to the limit, then cruise.
  const double ramp_time = std::max(speed_limit - speed, 0.0) / accel;
  const double ramp_dist = speed * ramp_time + 0.5 * accel * ramp_time * ramp_time;
  if (ramp_dist >= dist) {
    return (-speed + std::sqrt(speed * speed + 2.0 * accel * dist)) / accel;
  }
  return ramp_time + (dist - ramp_dist) / speed_limit;
}

double glosa_advice(double speed, double dist_to_stop,
                    const SignalForecast& forecast, double speed_limit,
                    double idm_accel) {
  if (forecast.green_now &&
      arrival_time(speed, dist_to_stop, speed_limit, kGlosaLaunchAccel) <=
          forecast.green_remaining) {
    return idm_accel;
  }
  double target = speed_limit;
  if (forecast.time_to_green > 0.0) {
    target = std::clamp(dist_to_stop / forecast.time_to_green, 0.0, speed_limit);
  }
  return std::clamp(target - speed, -kCommandAccelLimit, kCommandAccelLimit);
}

}  // namespace cotv
