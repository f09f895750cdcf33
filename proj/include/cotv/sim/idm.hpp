#ifndef COTV_SIM_IDM_HPP_
#define COTV_SIM_IDM_HPP_

#include <optional>

namespace cotv {

// Intelligent Driver Model coefficients.
struct IdmParams {
  double a_max = 1.0;      // m/s^2
  double b_comfort = 1.5;  // m/s^2
  double delta = 4.0;
  double headway = 1.0;    // s
  double s0 = 2.0;         // m

  void validate() const;
};

inline constexpr double kEmergencyDecel = 4.5;  // m/s^2

// What a follower sees ahead of it: the leader's speed and the bumper gap.
struct LeaderView {
  double speed = 0.0;
  double gap = 0.0;
};

// IDM acceleration clamped to [-kEmergencyDecel, a_max]. Throws when a
// leader is present with gap <= 0.
double idm_accel(double speed, std::optional<LeaderView> leader,
                 double speed_limit, const IdmParams& p);

// Largest speed for the next step such that the vehicle can still stop
// behind a leader braking at `decel` from `leader_speed`, keeping `min_gap`.
// Used for insertion speeds and the controlled-vehicle safety filter.
double safe_speed(double gap, double leader_speed, double decel,
                  double min_gap, double dt = 1.0);

}  // namespace cotv

#endif  // COTV_SIM_IDM_HPP_
