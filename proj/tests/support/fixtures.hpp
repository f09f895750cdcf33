#ifndef COTV_TESTS_FIXTURES_HPP_
#define COTV_TESTS_FIXTURES_HPP_

#include <memory>
#include <string>
#include <vector>

#include "cotv/error.hpp"
#include "cotv/net/network.hpp"
#include "cotv/net/scenario.hpp"
#include "cotv/sim/simulation.hpp"

namespace cotv::test {

inline std::shared_ptr<const RoadNetwork> grid(int rows = 1, int cols = 1,
                                               double len = 300.0,
                                               double limit = 15.0) {
  return std::make_shared<const RoadNetwork>(build_grid(rows, cols, len, limit));
}

inline RoadId road(const RoadNetwork& net, const std::string& name) {
  auto id = net.find_road(name);
  if (!id) throw Error(ErrorCategory::kInvalidArgument, "no road " + name);
  return *id;
}

// Straight route from a named origin road to a named destination road.
inline std::vector<RoadId> route(const RoadNetwork& net, const std::string& from,
                                 const std::string& to) {
  return net.route(road(net, from), road(net, to));
}

// Empty simulation on a 1x1 grid; vehicles are placed by the test.
inline Simulation empty_sim(std::shared_ptr<const RoadNetwork> net = grid(),
                            SimConfig cfg = {}) {
  return Simulation(std::move(net), {}, cfg);
}

// One 300 m self-loop road with no signal: a ring for long platoon runs.
inline std::shared_ptr<const RoadNetwork> ring(double len = 300.0,
                                               double limit = 15.0) {
  Node n;
  n.id = 0;
  n.name = "R";
  Road r;
  r.id = 0;
  r.name = "ring";
  r.from_node = 0;
  r.to_node = 0;
  r.length = len;
  r.speed_limit = limit;
  return std::make_shared<const RoadNetwork>(
      RoadNetwork({n}, {r}, std::vector<Intersection>{}));
}

inline const char* kNorthIn = "N0->I0_0";
inline const char* kSouthOut = "I0_0->S0";
inline const char* kSouthIn = "S0->I0_0";
inline const char* kNorthOut = "I0_0->N0";
inline const char* kWestIn = "W0->I0_0";
inline const char* kEastOut = "I0_0->E0";
inline const char* kEastIn = "E0->I0_0";
inline const char* kWestOut = "I0_0->W0";

}  // namespace cotv::test

#endif  // COTV_TESTS_FIXTURES_HPP_
