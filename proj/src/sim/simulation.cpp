#include "cotv/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "cotv/error.hpp"

namespace cotv {

namespace {

constexpr double kDt = 1.0;
// Lower bound on look-ahead gaps across a road boundary, where a vehicle
// that just crossed may still overlap the stop line.
constexpr double kMinLookaheadGap = 1e-3;
constexpr double kStopLineMargin = 0.5;

}  // namespace

std::optional<LeaderView> red_light_virtual_leader(const Vehicle& vehicle,
                                                   const Road& road,
                                                   Signal signal,
                                                   double b_comfort) {
  const double dist = road.length - vehicle.position;
  switch (signal) {
    case Signal::kGreen:
      return std::nullopt;
    case Signal::kYellow: {
      if (dist <= 0.0) return std::nullopt;
      const double needed = vehicle.speed * vehicle.speed / (2.0 * dist);
      if (needed > b_comfort) return std::nullopt;
      return LeaderView{0.0, dist};
    }
    case Signal::kRed:
      return LeaderView{0.0, dist};
  }
  return std::nullopt;
}

Simulation::Simulation(std::shared_ptr<const RoadNetwork> network,
                       InsertionSchedule schedule, SimConfig config)
    : network_(std::move(network)), config_(std::move(config)) {
  if (!network_) {
    throw Error(ErrorCategory::kInvalidArgument, "simulation needs a network");
  }
  config_.idm.validate();
  by_road_.resize(network_->roads().size());
  for (const Intersection& x : network_->intersections()) {
    lights_.push_back(make_light(x, config_.min_green));
  }
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const PlannedVehicle& a, const PlannedVehicle& b) {
                     return a.time < b.time;
                   });
  for (auto& p : schedule) {
    if (p.route.empty()) {
      throw Error(ErrorCategory::kInvalidArgument, "planned vehicle has no route");
    }
    pending_.push_back(std::move(p));
  }
}

const Vehicle* Simulation::find(VehicleId id) const {
  auto it = std::lower_bound(
      vehicles_.begin(), vehicles_.end(), id,
      [](const Vehicle& v, VehicleId key) { return v.id < key; });
  if (it == vehicles_.end() || it->id != id) return nullptr;
  return &*it;
}

Signal Simulation::signal_for(RoadId road) const {
  const Road& r = network_->road(road);
  if (!r.approach_intersection) return Signal::kGreen;
  return lights_[*r.approach_intersection].signal_for(road);
}

const Vehicle* Simulation::predecessor(const Vehicle& v) const {
  const auto& list = by_road_[v.road()];
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (vehicles_[list[k]].id == v.id) {
      return k == 0 ? nullptr : &vehicles_[list[k - 1]];
    }
  }
  return nullptr;
}

std::optional<LeaderView> Simulation::leader_of(const Vehicle& v) const {
  if (const Vehicle* pred = predecessor(v)) {
    return LeaderView{pred->speed, pred->position - pred->length - v.position};
  }
  if (v.on_last_road()) return std::nullopt;
  const Road& road = network_->road(v.road());
  if (road.approach_intersection &&
      red_light_virtual_leader(v, road, signal_for(road.id),
                               config_.idm.b_comfort)) {
    return std::nullopt;
  }
  const RoadId next = v.route[v.route_index + 1];
  const auto& ahead = by_road_[next];
  if (ahead.empty()) return std::nullopt;
  const Vehicle& last = vehicles_[ahead.back()];
  if (last.id == v.id) return std::nullopt;
  const double gap =
      (road.length - v.position) + (last.position - last.length);
  return LeaderView{last.speed, std::max(gap, kMinLookaheadGap)};
}

double Simulation::acceleration_for(
    const Vehicle& v, const std::map<VehicleId, double>& cav_accels) const {
  const Road& road = network_->road(v.road());
  const double limit = road.speed_limit;
  const std::optional<LeaderView> leader = leader_of(v);
  std::optional<LeaderView> stop;
  if (road.approach_intersection && !v.on_last_road()) {
    stop = red_light_virtual_leader(v, road, signal_for(road.id),
                                    config_.idm.b_comfort);
  }

  double a = 0.0;
  if (auto it = cav_accels.find(v.id); it != cav_accels.end()) {
    a = std::clamp(it->second, -kCommandAccelLimit, kCommandAccelLimit);
    if (config_.safe_speed_filter) {
      if (leader) {
        const double vs = safe_speed(leader->gap, leader->speed,
                                     kEmergencyDecel, v.min_gap, kDt);
        a = std::min(a, (vs - v.speed) / kDt);
      }
      if (stop) {
        const double vs =
            safe_speed(stop->gap, 0.0, kEmergencyDecel, kStopLineMargin, kDt);
        a = std::min(a, (vs - v.speed) / kDt);
      }
      a = std::max(a, -kEmergencyDecel);
    }
  } else {
    a = idm_accel(v.speed, leader, limit, config_.idm);
    if (stop) {
      LeaderView guarded{0.0, std::max(stop->gap, kMinLookaheadGap)};
      a = std::min(a, idm_accel(v.speed, guarded, limit, config_.idm));
    }
  }
  // Keep the post-step speed inside [0, limit].
  return std::clamp(a, -v.speed / kDt, (limit - v.speed) / kDt);
}

void Simulation::step(const std::map<IntersectionId, int>& tl_actions,
                      const std::map<VehicleId, double>& cav_accels) {
  for (const auto& [id, action] : tl_actions) {
    if (id >= lights_.size()) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "unknown traffic light " + std::to_string(id));
    }
  }
  // Omitted lights keep their green but still leave an expired yellow.
  for (TrafficLight& light : lights_) {
    auto it = tl_actions.find(light.intersection);
    light = apply_tl_action(light, it == tl_actions.end() ? 0 : it->second);
  }
  for (const auto& [id, accel] : cav_accels) {
    const Vehicle* v = find(id);
    if (v == nullptr) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "unknown vehicle " + std::to_string(id));
    }
    if (v->kind != VehicleKind::kCav) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "vehicle " + std::to_string(id) + " is not a CAV");
    }
    if (!std::isfinite(accel)) {
      throw Error(ErrorCategory::kNumerical, "non-finite acceleration command");
    }
  }

  // Overlaps only survive to here when placed directly; resolve them first.
  remove_collisions();

  std::vector<double> accel(vehicles_.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    accel[i] = acceleration_for(vehicles_[i], cav_accels);
  }

  const double now = clock_ + kDt;
  std::vector<bool> arrived(vehicles_.size(), false);
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& v = vehicles_[i];
    v.controlled = cav_accels.count(v.id) > 0;
    const double limit = network_->road(v.road()).speed_limit;
    const double v0 = v.speed;
    double v1 = std::clamp(v0 + accel[i] * kDt, 0.0, limit);
    double x = v.position + v1 * kDt;
    double travelled = v1 * kDt;
    while (true) {
      const Road& road = network_->road(v.road());
      if (v.on_last_road()) {
        if (x >= road.length) {
          travelled -= x - road.length;
          x = road.length;
          arrived[i] = true;
        }
        break;
      }
      if (x <= road.length) break;
      if (signal_for(road.id) == Signal::kRed) {
        // Hold at the stop line.
        travelled -= x - road.length;
        x = road.length;
        v1 = 0.0;
        break;
      }
      x -= road.length;
      ++v.route_index;
    }
    // A hold at the stop line is reported as an emergency stop.
    v.accel = std::max((v1 - v0) / kDt, -kEmergencyDecel);
    v.speed = v1;
    v.position = x;
    v.distance += travelled;
    v.fuel += config_.fuel.fuel_rate(v1, v.accel) * kDt;
    v.co2 += config_.fuel.co2_rate(v1, v.accel) * kDt;
  }

  for (TrafficLight& light : lights_) tick(light, kDt);
  clock_ = now;

  std::vector<Vehicle> still;
  still.reserve(vehicles_.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& v = vehicles_[i];
    if (!arrived[i]) {
      still.push_back(std::move(v));
      continue;
    }
    TripRecord t;
    t.id = v.id;
    t.kind = v.kind;
    t.depart = v.depart_time;
    t.arrival = clock_;
    for (RoadId r : v.route) {
      const Road& road = network_->road(r);
      t.route_length += road.length;
      t.ideal_time += road.length / road.speed_limit;
    }
    t.fuel = v.fuel;
    t.co2 = v.co2;
    t.distance = v.distance;
    trips_.push_back(t);
  }
  vehicles_ = std::move(still);
  rebuild_index();

  try_insertions();
  remove_collisions();
  ttc_last_ = count_ttc_events(*this, config_.ttc_threshold);
  ttc_total_ += ttc_last_;
  if (trace_ != nullptr) write_trace();
}

void Simulation::rebuild_index() {
  for (auto& list : by_road_) list.clear();
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    by_road_[vehicles_[i].road()].push_back(i);
  }
  for (auto& list : by_road_) {
    std::sort(list.begin(), list.end(), [this](std::size_t a, std::size_t b) {
      const Vehicle& va = vehicles_[a];
      const Vehicle& vb = vehicles_[b];
      if (va.position != vb.position) return va.position > vb.position;
      return va.id < vb.id;
    });
  }
}

void Simulation::try_insertions() {
  std::set<RoadId> blocked;
  std::deque<PlannedVehicle> keep;
  while (!pending_.empty() && pending_.front().time <= clock_) {
    PlannedVehicle p = std::move(pending_.front());
    pending_.pop_front();
    const RoadId origin = p.route.front();
    const auto& list = by_road_[origin];
    double insert_speed = p.initial_speed;
    bool ok = !blocked.count(origin);
    if (ok && !list.empty()) {
      const Vehicle& last = vehicles_[list.back()];
      const double rear = last.position - last.length;
      if (rear < config_.insertion_clearance) {
        ok = false;
      } else {
        insert_speed = std::min(
            insert_speed,
            safe_speed(rear, last.speed, kEmergencyDecel, config_.min_gap));
      }
    }
    if (!ok) {
      blocked.insert(origin);
      keep.push_back(std::move(p));
      continue;
    }
    Vehicle v;
    v.id = next_id_++;
    v.kind = p.kind;
    v.route = std::move(p.route);
    v.position = 0.0;
    v.speed = std::clamp(insert_speed, 0.0,
                         network_->road(origin).speed_limit);
    v.length = config_.vehicle_length;
    v.min_gap = config_.min_gap;
    v.depart_time = clock_;
    vehicles_.push_back(std::move(v));
    ++inserted_;
    rebuild_index();
  }
  // Blocked vehicles keep their place at the head of the queue.
  while (!keep.empty()) {
    pending_.push_front(std::move(keep.back()));
    keep.pop_back();
  }
}

void Simulation::remove_collisions() {
  std::vector<CollisionEvent> events = detect_collisions(*this);
  if (events.empty()) return;
  std::set<VehicleId> gone;
  for (const CollisionEvent& e : events) {
    gone.insert(e.follower);
    gone.insert(e.leader);
    collisions_.push_back(e);
  }
  std::erase_if(vehicles_,
                [&](const Vehicle& v) { return gone.count(v.id) > 0; });
  collision_removed_ += gone.size();
  rebuild_index();
}

VehicleId Simulation::place_vehicle(const VehiclePlacement& placement) {
  if (placement.route.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "placement needs a route");
  }
  const Road& road = network_->road(placement.route.front());
  if (placement.position < 0.0 || placement.position > road.length ||
      placement.speed < 0.0 || placement.speed > road.speed_limit) {
    throw Error(ErrorCategory::kInvalidArgument,
                "placement outside the road or speed box");
  }
  Vehicle v;
  v.id = next_id_++;
  v.kind = placement.kind;
  v.route = placement.route;
  v.position = placement.position;
  v.speed = placement.speed;
  v.accel = placement.accel;
  v.length = config_.vehicle_length;
  v.min_gap = config_.min_gap;
  v.depart_time = clock_;
  vehicles_.push_back(std::move(v));
  ++inserted_;
  rebuild_index();
  return next_id_ - 1;
}

void Simulation::set_light(IntersectionId id, std::size_t phase,
                           double time_in_phase) {
  TrafficLight& light = lights_.at(id);
  if (phase >= light.phases.size() || time_in_phase < 0.0) {
    throw Error(ErrorCategory::kInvalidArgument, "invalid light state");
  }
  light.current = phase;
  light.time_in_phase = time_in_phase;
}

void Simulation::write_trace() const {
  std::ostream& out = *trace_;
  for (const Vehicle& v : vehicles_) {
    out << clock_ << ',' << v.id << ',' << network_->road(v.road()).name << ','
        << v.position << ',' << v.speed << ',' << v.accel << '\n';
  }
}

std::vector<CollisionEvent> detect_collisions(const Simulation& sim) {
  std::vector<CollisionEvent> events;
  for (const Road& road : sim.network().roads()) {
    const auto& list = sim.on_road(road.id);
    for (std::size_t k = 1; k < list.size(); ++k) {
      const Vehicle& leader = sim.at(list[k - 1]);
      const Vehicle& follower = sim.at(list[k]);
      const double gap = leader.position - leader.length - follower.position;
      if (gap <= 0.0) {
        events.push_back(
            CollisionEvent{sim.clock(), road.id, follower.id, leader.id, gap});
      }
    }
  }
  return events;
}

long count_ttc_events(const Simulation& sim, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "TTC threshold must be > 0");
  }
  long events = 0;
  for (const Road& road : sim.network().roads()) {
    const auto& list = sim.on_road(road.id);
    for (std::size_t k = 1; k < list.size(); ++k) {
      const Vehicle& leader = sim.at(list[k - 1]);
      const Vehicle& follower = sim.at(list[k]);
      const double closing = follower.speed - leader.speed;
      if (closing <= 0.0) continue;
      const double gap = leader.position - leader.length - follower.position;
      if (gap / closing < threshold) ++events;
    }
  }
  return events;
}

}  // namespace cotv
