#ifndef COTV_SIM_EMISSIONS_HPP_
#define COTV_SIM_EMISSIONS_HPP_

namespace cotv {

// Power-demand fuel surrogate for a mid-size petrol passenger car:
//
//   P = m a v + m g C_r v + 0.5 rho C_d A v^3
//   fuel = idle + max(P, 0) / (eta E)
//
// Only relative comparisons between controllers are meaningful.
struct FuelModel {
  double mass = 1500.0;             // kg
  double rolling_resistance = 0.01;
  double drag_coefficient = 0.3;
  double frontal_area = 2.2;        // m^2
  double air_density = 1.2;         // kg/m^3
  double gravity = 9.81;            // m/s^2
  double idle_rate = 1.6e-4;        // l/s
  double efficiency = 0.3;
  double energy_density = 3.46e7;   // J/l
  double co2_per_litre = 2392.0;    // g/l

  double tractive_power(double speed, double accel) const;  // W
  double fuel_rate(double speed, double accel) const;       // l/s
  double co2_rate(double speed, double accel) const;        // g/s
};

}  // namespace cotv

#endif  // COTV_SIM_EMISSIONS_HPP_
