#ifndef COTV_CONTROL_BASELINES_HPP_
#define COTV_CONTROL_BASELINES_HPP_

#include <vector>

#include "cotv/sim/simulation.hpp"

namespace cotv {

// Fixed-time plan: green duration per green phase; yellow phases keep
// their fixed duration.
struct StaticPlan {
  double green = 40.0;  // s
  double yellow = kYellowDuration;

  double cycle_length(std::size_t green_phases) const {
    return static_cast<double>(green_phases) * (green + yellow);
  }
};

struct ActuatedConfig {
  double max_green = 45.0;      // s
  double gap_threshold = 3.0;   // s without a detection before gapping out
  double detection_distance = 50.0;  // m upstream of the stop line

  void validate(double min_green) const;
};

// Per-light detector memory for actuated control.
struct ActuatedState {
  double since_detection = 0.0;  // s
};

// 1 exactly when the current green has run its planned duration.
int static_tick(const TrafficLight& light, const StaticPlan& plan);

// Updates the detector memory with the current state (call once per step,
// before deciding) and returns 1 on gap-out or max-out.
int actuated_tick(const TrafficLight& light, const Simulation& sim,
                  const ActuatedConfig& cfg, ActuatedState& state);

// Served-road pressure of a green phase: sum over its incoming roads of
// (vehicles on the road - vehicles on the road straight across).
double phase_pressure(const Simulation& sim, const TrafficLight& light,
                      std::size_t phase);

// After min_green, 1 iff the next green phase has strictly higher pressure.
int max_pressure_tick(const TrafficLight& light, const Simulation& sim,
                      double min_green);

// When an approach will next be served, projected from a fixed-duration
// schedule.
struct SignalForecast {
  bool green_now = false;
  double green_remaining = 0.0;  // s, meaningful when green_now
  double time_to_green = 0.0;    // s until the next green start
};

// Acceleration assumed when checking whether a slow vehicle still makes the
// current green.
inline constexpr double kGlosaLaunchAccel = 1.0;  // m/s^2

// Time to cover `dist` starting at `speed`, accelerating at `accel` up to
// `speed_limit`. With speed already at the limit this is dist / speed.
double arrival_time(double speed, double dist, double speed_limit,
                    double accel);

// `green_duration` is the planned (or projected maximum) green length.
SignalForecast forecast_signal(const TrafficLight& light, RoadId road,
                               double green_duration);

// Speed advisory toward the next green window. Returns `idm_accel` when the
// vehicle reaches the line within the current green (see arrival_time);
// otherwise the constant speed dist / time_to_green (clamped to [0, v*])
// is targeted with an acceleration clamped to +-3 m/s^2.
double glosa_advice(double speed, double dist_to_stop,
                    const SignalForecast& forecast, double speed_limit,
                    double idm_accel);

}  // namespace cotv

#endif  // COTV_CONTROL_BASELINES_HPP_
