#include "cotv/sim/emissions.hpp"

#include <algorithm>

#include "cotv/error.hpp"

namespace cotv {

double FuelModel::tractive_power(double speed, double accel) const {
  if (speed < 0.0) {
    throw Error(ErrorCategory::kInvalidArgument, "speed must be >= 0");
  }
  return mass * accel * speed + mass * gravity * rolling_resistance * speed +
         0.5 * air_density * drag_coefficient * frontal_area * speed * speed *
             speed;
}

double FuelModel::fuel_rate(double speed, double accel) const {
  const double p = tractive_power(speed, accel);
  return idle_rate + std::max(p, 0.0) / (efficiency * energy_density);
}

double FuelModel::co2_rate(double speed, double accel) const {
  return fuel_rate(speed, accel) * co2_per_litre;
}

}  // namespace cotv
