#include "cotv/rl/gae.hpp"

#include <cmath>

#include "cotv/error.hpp"

namespace cotv {

AdvantageEstimate compute_gae(std::span<const double> rewards,
                              std::span<const double> values,
                              double last_value, double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw Error(ErrorCategory::kShapeMismatch,
                "rewards and values differ in length");
  }
  const std::size_t n = rewards.size();
  AdvantageEstimate out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_value = last_value;
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_value - values[k];
    running = delta + gamma * lambda * running;
    out.advantages[k] = running;
    out.returns[k] = running + values[k];
    next_value = values[k];
  }
  for (double a : out.advantages) {
    if (!std::isfinite(a)) {
      throw Error(ErrorCategory::kNumerical, "non-finite advantage");
    }
  }
  return out;
}

}  // namespace cotv
