#include "cotv/sim/traffic_light.hpp"

#include <algorithm>

#include "cotv/error.hpp"

namespace cotv {

Signal TrafficLight::signal_for(RoadId road) const {
  const Phase& p = phase();
  if (std::find(p.served.begin(), p.served.end(), road) == p.served.end()) {
    return Signal::kRed;
  }
  return p.kind == PhaseKind::kGreen ? Signal::kGreen : Signal::kYellow;
}

TrafficLight make_light(const Intersection& intersection, double min_green) {
  if (intersection.phase_groups.empty()) {
    throw Error(ErrorCategory::kInvalidArgument,
                "intersection has no phase groups");
  }
  TrafficLight light;
  light.intersection = intersection.id;
  light.min_green = min_green;
  for (const auto& group : intersection.phase_groups) {
    light.phases.push_back(Phase{PhaseKind::kGreen, group, 0.0});
    light.phases.push_back(Phase{PhaseKind::kYellow, group, kYellowDuration});
  }
  return light;
}

TrafficLight apply_tl_action(TrafficLight light, int action) {
  if (action != 0 && action != 1) {
    throw Error(ErrorCategory::kInvalidArgument,
                "traffic light action must be 0 or 1");
  }
  if (light.in_green()) {
    if (action == 1 && light.time_in_phase >= light.min_green) {
      light.current = light.next_index();
      light.time_in_phase = 0.0;
    }
  } else if (light.time_in_phase >= light.phase().duration) {
    light.current = light.next_index();
    light.time_in_phase = 0.0;
  }
  return light;
}

void tick(TrafficLight& light, double dt) { light.time_in_phase += dt; }

}  // namespace cotv
