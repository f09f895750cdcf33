#ifndef COTV_ENV_AGENTS_HPP_
#define COTV_ENV_AGENTS_HPP_

#include <map>
#include <string_view>
#include <vector>

#include "cotv/sim/simulation.hpp"

namespace cotv {

// How lights and vehicles exchange state.
//   kCoTV      closest CAV per incoming road, full state exchange
//   kCoTVStar  every CAV on every incoming road, full state exchange
//   kICoTV     closest CAV per road, no exchanged vehicle or signal state
//   kMCoTV     as kCoTV plus the other agent type's previous actions
enum class CooperationMode { kCoTV, kCoTVStar, kICoTV, kMCoTV };

std::string_view to_string(CooperationMode mode);

inline constexpr double kAccelNorm = 3.0;      // m/s^2
inline constexpr double kDefaultAStar = 9.0;   // m/s^2, CAV reward normalizer

// Maximum number of vehicles on one road: longest road over the space one
// vehicle needs (length + minimum gap), at least 1.
int max_road_capacity(const RoadNetwork& network, double vehicle_length,
                      double min_gap);

// Previous-step actions, only read in kMCoTV.
struct ExchangeMemory {
  std::vector<int> light_actions;                 // by intersection
  std::map<VehicleId, double> vehicle_commands;   // commanded accel
};

std::size_t tl_observation_size(const RoadNetwork& network,
                                IntersectionId light, CooperationMode mode);
std::size_t cav_observation_size(CooperationMode mode);

std::vector<VehicleId> select_cav_agents(const Simulation& sim,
                                         CooperationMode mode);

// [phase / #phases]
// ++ [count / c] per incoming road ++ [count / c] per outgoing road
// ++ per incoming road: [speed / v*, accel / 3, distance / length,
//                        one-hot road slot]
//    of the vehicle closest to the intersection ([0, 0, 1, one-hot] if none)
// kICoTV zeroes the per-road vehicle blocks; kMCoTV appends the previous
// commanded accel / 3 of the CAV agent on each incoming road.
std::vector<double> tl_observation(const Simulation& sim, IntersectionId light,
                                   CooperationMode mode, int capacity,
                                   const ExchangeMemory& memory = {});

// [speed / v*, accel / 3, leader speed / v*, leader accel / 3,
//  gap / length, distance to stop line / length, signal]
// Without a leader the leader slots read [1, 0, 1]. Signal is 1 green,
// 0.5 yellow, 0 red; kICoTV pins it to 0. kMCoTV appends the approaching
// light's previous action.
std::vector<double> cav_observation(const Simulation& sim, VehicleId vehicle,
                                    CooperationMode mode,
                                    const ExchangeMemory& memory = {});

// -(N_in - N_out) / c
double tl_reward(const Simulation& sim, IntersectionId light, int capacity);

// r1 + r2 over all vehicles K on the CAV's road:
//   r1 = -sum(v* - v_j) / (v* |K|)
//   r2 = -sqrt(sum (max(a_j, 0) / a*)^2) / |K|
double cav_reward(const Simulation& sim, VehicleId vehicle,
                  double a_star = kDefaultAStar);

}  // namespace cotv

#endif  // COTV_ENV_AGENTS_HPP_
