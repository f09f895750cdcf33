#ifndef COTV_RL_GAE_HPP_
#define COTV_RL_GAE_HPP_

#include <span>
#include <vector>

namespace cotv {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one time-contiguous segment.
// `last_value` is the value after the final step (0 for a terminal end).
//
//   delta_t = r_t + gamma * v_{t+1} - v_t
//   A_t     = delta_t + gamma * lambda * A_{t+1}
//   R_t     = A_t + v_t
AdvantageEstimate compute_gae(std::span<const double> rewards,
                              std::span<const double> values,
                              double last_value, double gamma, double lambda);

}  // namespace cotv

#endif  // COTV_RL_GAE_HPP_
