#ifndef COTV_SIM_TRAFFIC_LIGHT_HPP_
#define COTV_SIM_TRAFFIC_LIGHT_HPP_

#include <vector>

#include "cotv/net/network.hpp"

namespace cotv {

enum class PhaseKind { kGreen, kYellow };

enum class Signal { kRed, kYellow, kGreen };

inline constexpr double kYellowDuration = 3.0;  // s
inline constexpr double kDefaultMinGreen = 5.0;  // s

struct Phase {
  PhaseKind kind = PhaseKind::kGreen;
  std::vector<RoadId> served;
  // Fixed for yellow phases; unused for green under adaptive control.
  double duration = 0.0;
};

struct TrafficLight {
  IntersectionId intersection = 0;
  std::vector<Phase> phases;
  std::size_t current = 0;
  // Whole seconds the current phase has been displayed before this step.
  double time_in_phase = 0.0;
  double min_green = kDefaultMinGreen;

  const Phase& phase() const { return phases[current]; }
  bool in_green() const { return phase().kind == PhaseKind::kGreen; }
  std::size_t next_index() const { return (current + 1) % phases.size(); }

  Signal signal_for(RoadId road) const;
};

// Green-A, Yellow-A, Green-B, Yellow-B, ... over the intersection's phase
// groups.
TrafficLight make_light(const Intersection& intersection,
                        double min_green = kDefaultMinGreen);

// Phase transition decided at the start of a step. Action 1 in green leaves
// for the following yellow once min_green has elapsed; yellow advances on its
// own after kYellowDuration regardless of the action. Transitions reset the
// timer; otherwise the light is returned unchanged and `tick` advances it
// after the step.
TrafficLight apply_tl_action(TrafficLight light, int action);

void tick(TrafficLight& light, double dt = 1.0);

}  // namespace cotv

#endif  // COTV_SIM_TRAFFIC_LIGHT_HPP_
