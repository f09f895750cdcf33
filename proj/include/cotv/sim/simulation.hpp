#ifndef COTV_SIM_SIMULATION_HPP_
#define COTV_SIM_SIMULATION_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "cotv/net/network.hpp"
#include "cotv/net/scenario.hpp"
#include "cotv/sim/emissions.hpp"
#include "cotv/sim/idm.hpp"
#include "cotv/sim/traffic_light.hpp"

namespace cotv {

using VehicleId = std::uint64_t;

inline constexpr double kCommandAccelLimit = 3.0;  // m/s^2

struct Vehicle {
  VehicleId id = 0;
  VehicleKind kind = VehicleKind::kHdv;
  // True while an external controller commands this vehicle.
  bool controlled = false;
  std::vector<RoadId> route;
  std::size_t route_index = 0;
  double position = 0.0;  // m from road start to the front bumper
  double speed = 0.0;     // m/s
  double accel = 0.0;     // m/s^2, realized over the last step
  double length = 5.0;
  double min_gap = 2.5;
  double depart_time = 0.0;
  double fuel = 0.0;      // l
  double co2 = 0.0;       // g
  double distance = 0.0;  // m

  RoadId road() const { return route[route_index]; }
  bool on_last_road() const { return route_index + 1 == route.size(); }
};

struct TripRecord {
  VehicleId id = 0;
  VehicleKind kind = VehicleKind::kHdv;
  double depart = 0.0;
  double arrival = 0.0;
  double route_length = 0.0;  // m
  double ideal_time = 0.0;    // s, free-flow at each road's limit
  double fuel = 0.0;
  double co2 = 0.0;
  double distance = 0.0;

  double travel_time() const { return arrival - depart; }
};

struct CollisionEvent {
  double time = 0.0;
  RoadId road = 0;
  VehicleId follower = 0;
  VehicleId leader = 0;
  double gap = 0.0;
};

struct SimConfig {
  IdmParams idm;
  FuelModel fuel;
  double min_green = kDefaultMinGreen;
  double ttc_threshold = 3.0;          // s
  double insertion_clearance = 10.0;   // m kept free at the road start
  double vehicle_length = 5.0;
  double min_gap = 2.5;
  // Caps commanded accelerations so controlled vehicles can always stop
  // behind their leader and at a stop line they must respect.
  bool safe_speed_filter = true;
};

// A vehicle placed directly on the network, bypassing the schedule.
struct VehiclePlacement {
  VehicleKind kind = VehicleKind::kHdv;
  std::vector<RoadId> route;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;  // reported as the last step's realized value
};

class Simulation {
 public:
  Simulation(std::shared_ptr<const RoadNetwork> network,
             InsertionSchedule schedule, SimConfig config = {});

  // One 1 s transition. Lights missing from `tl_actions` act as if given 0.
  // Every key of `cav_accels` must be an active CAV; those vehicles are
  // controlled for this step, all others follow IDM.
  void step(const std::map<IntersectionId, int>& tl_actions,
            const std::map<VehicleId, double>& cav_accels);

  double clock() const { return clock_; }
  const RoadNetwork& network() const { return *network_; }
  std::shared_ptr<const RoadNetwork> network_ptr() const { return network_; }
  const SimConfig& config() const { return config_; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Vehicle* find(VehicleId id) const;
  // Active vehicles on a road, front-most first.
  const std::vector<std::size_t>& on_road(RoadId road) const {
    return by_road_.at(road);
  }
  const Vehicle& at(std::size_t index) const { return vehicles_[index]; }

  const std::vector<TrafficLight>& lights() const { return lights_; }
  const TrafficLight& light(IntersectionId id) const { return lights_.at(id); }
  Signal signal_for(RoadId road) const;

  // Immediate leader on the same road, or the last vehicle on the next
  // route road when the vehicle may cross. Gap is bumper to bumper.
  std::optional<LeaderView> leader_of(const Vehicle& v) const;
  // Acceleration the vehicle would get this step without a command.
  double model_accel(const Vehicle& v) const { return acceleration_for(v, {}); }
  // Same-road predecessor only.
  const Vehicle* predecessor(const Vehicle& v) const;

  const std::vector<TripRecord>& trips() const { return trips_; }
  const std::vector<CollisionEvent>& collisions() const { return collisions_; }
  std::size_t inserted() const { return inserted_; }
  std::size_t collision_removed() const { return collision_removed_; }
  std::size_t pending() const { return pending_.size(); }
  long ttc_events_total() const { return ttc_total_; }
  long ttc_events_last_step() const { return ttc_last_; }

  // Test and scenario hooks.
  VehicleId place_vehicle(const VehiclePlacement& placement);
  void set_light(IntersectionId id, std::size_t phase, double time_in_phase);
  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  double acceleration_for(const Vehicle& v,
                          const std::map<VehicleId, double>& cav_accels) const;
  void rebuild_index();
  void try_insertions();
  void remove_collisions();
  void write_trace() const;

  std::shared_ptr<const RoadNetwork> network_;
  SimConfig config_;
  double clock_ = 0.0;
  std::vector<Vehicle> vehicles_;
  std::vector<std::vector<std::size_t>> by_road_;
  std::vector<TrafficLight> lights_;
  std::deque<PlannedVehicle> pending_;
  std::vector<TripRecord> trips_;
  std::vector<CollisionEvent> collisions_;
  std::size_t inserted_ = 0;
  std::size_t collision_removed_ = 0;
  long ttc_total_ = 0;
  long ttc_last_ = 0;
  VehicleId next_id_ = 0;
  std::ostream* trace_ = nullptr;
};

// Standing leader at the stop line when the vehicle must stop for its
// approach's signal. On yellow the vehicle proceeds when stopping would need
// more than comfortable braking (v^2 / 2d > b_comfort).
std::optional<LeaderView> red_light_virtual_leader(const Vehicle& vehicle,
                                                   const Road& road,
                                                   Signal signal,
                                                   double b_comfort);

// Adjacent same-road pairs with bumper gap <= 0. Does not modify `sim`.
std::vector<CollisionEvent> detect_collisions(const Simulation& sim);

// Adjacent same-road closing pairs with gap / closing speed < threshold.
long count_ttc_events(const Simulation& sim, double threshold = 3.0);

}  // namespace cotv

#endif  // COTV_SIM_SIMULATION_HPP_
