#include "cotv/sim/idm.hpp"

#include <algorithm>
#include <cmath>

#include "cotv/error.hpp"

namespace cotv {

void IdmParams::validate() const {
  if (!(a_max > 0 && b_comfort > 0 && delta > 0 && headway > 0 && s0 > 0)) {
    throw Error(ErrorCategory::kConfig, "IDM parameters must be positive");
  }
}

double idm_accel(double speed, std::optional<LeaderView> leader,
                 double speed_limit, const IdmParams& p) {
  if (speed < 0.0) {
    throw Error(ErrorCategory::kInvalidArgument, "IDM speed must be >= 0");
  }
  double a = 1.0 - std::pow(speed / speed_limit, p.delta);
  if (leader) {
    if (!(leader->gap > 0.0)) {
      throw Error(ErrorCategory::kSimulation,
                  "IDM gap must be positive when a leader is present");
    }
    const double dv = speed - leader->speed;
    const double s_star =
        std::max(0.0, p.s0 + speed * p.headway +
                          speed * dv / (2.0 * std::sqrt(p.a_max * p.b_comfort)));
    const double ratio = s_star / leader->gap;
    a -= ratio * ratio;
  }
  return std::clamp(p.a_max * a, -kEmergencyDecel, p.a_max);
}

double safe_speed(double gap, double leader_speed, double decel,
                  double min_gap, double dt) {
  // Distance the follower may cover: travel at v for dt then brake at decel
  // must stay within gap - min_gap + the leader's braking distance.
  const double budget =
      gap - min_gap + leader_speed * leader_speed / (2.0 * decel);
  if (budget <= 0.0) return 0.0;
  // v*dt + v^2/(2 decel) = budget
  const double b = dt;
  const double a = 1.0 / (2.0 * decel);
  return (-b + std::sqrt(b * b + 4.0 * a * budget)) / (2.0 * a);
}

}  // namespace cotv
