#ifndef COTV_NET_SCENARIO_HPP_
#define COTV_NET_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cotv/net/network.hpp"

namespace cotv {

enum class VehicleKind { kHdv, kCav };

struct FlowSpec {
  std::string origin;       // road name
  std::string destination;  // road name
  int count = 0;
  double start_time = 0.0;  // s
  double period = 1.0;      // s between consecutive insertions
  // Unset means uniform-random in [0, speed limit of the origin road].
  std::optional<double> initial_speed;
};

struct GridDescriptor {
  int rows = 1;
  int cols = 1;
  double road_length = 300.0;
  double speed_limit = 15.0;
};

struct ScenarioSpec {
  GridDescriptor grid;
  std::vector<FlowSpec> flows;
  int horizon = 720;
  double penetration_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// One vehicle to be inserted. Kinds and initial speeds are fixed here,
// before the simulation starts.
struct PlannedVehicle {
  double time = 0.0;
  std::size_t flow = 0;
  std::vector<RoadId> route;
  VehicleKind kind = VehicleKind::kHdv;
  double initial_speed = 0.0;
};

using InsertionSchedule = std::vector<PlannedVehicle>;

RoadNetwork build_network(const GridDescriptor& grid);

// Go-straight demand of the single-intersection scenario: S->N and W->E
// from t=1 s, N->S from t=45 s, E->W from t=105 s, 300 s generation window.
std::vector<FlowSpec> standard_flows_1x1();

// 1x6 arterial: W->E and E->W as above, plus N->S and S->N for every column.
std::vector<FlowSpec> standard_flows_1x6();

ScenarioSpec standard_scenario_1x1();
ScenarioSpec standard_scenario_1x6();

int total_vehicles(const std::vector<FlowSpec>& flows);

// Expands flows into a periodic schedule ordered by (time, flow). Exactly
// round(rate * total) vehicles are CAVs; which ones is drawn from `seed`.
// Pure function of its arguments.
InsertionSchedule assign_vehicle_kinds(const RoadNetwork& network,
                                       const std::vector<FlowSpec>& flows,
                                       double penetration_rate,
                                       std::uint64_t seed);

// Scenario text format:
//
//   # comment
//   network { grid: 1x1, road_length: 300, speed_limit: 15 }
//   flow { origin: N0->I0_0, destination: I0_0->S0, count: 24,
//          start: 45, period: 12.5 }
//   sim { horizon: 720, penetration: 1.0, seed: 7 }
//
// Entries are separated by commas or newlines. `flow` may also carry
// `speed: random` (default) or `speed: <m/s>`. Unknown blocks and keys are
// rejected.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);
std::string format_scenario(const ScenarioSpec& spec);

}  // namespace cotv

#endif  // COTV_NET_SCENARIO_HPP_
