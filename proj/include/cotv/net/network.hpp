#ifndef COTV_NET_NETWORK_HPP_
#define COTV_NET_NETWORK_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cotv {

using NodeId = std::size_t;
using RoadId = std::size_t;
using IntersectionId = std::size_t;

struct Node {
  NodeId id = 0;
  std::string name;
  // Set for signalized nodes.
  std::optional<IntersectionId> intersection;
};

// A single-lane directed road.
struct Road {
  RoadId id = 0;
  std::string name;
  NodeId from_node = 0;
  NodeId to_node = 0;
  double length = 0.0;       // m
  double speed_limit = 0.0;  // m/s
  // The signalized intersection this road feeds into, if any.
  std::optional<IntersectionId> approach_intersection;
};

// Compass slot of an incoming road at a grid intersection. The incoming
// list of every grid intersection is ordered by this slot.
enum class Approach { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

struct Intersection {
  IntersectionId id = 0;
  NodeId node = 0;
  std::vector<RoadId> incoming;
  std::vector<RoadId> outgoing;
  // Incoming roads grouped by the green phase that serves them, in phase
  // order (north-south first, then west-east for grids).
  std::vector<std::vector<RoadId>> phase_groups;
  // Outgoing road straight across from incoming[k]; empty when the
  // intersection has no such pairing.
  std::vector<RoadId> through;
};

class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Node> nodes, std::vector<Road> roads,
              std::vector<Intersection> intersections);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Road>& roads() const { return roads_; }
  const std::vector<Intersection>& intersections() const {
    return intersections_;
  }

  const Road& road(RoadId id) const { return roads_.at(id); }
  const Intersection& intersection(IntersectionId id) const {
    return intersections_.at(id);
  }

  std::optional<RoadId> find_road(const std::string& name) const;
  std::optional<NodeId> find_node(const std::string& name) const;

  // Roads leaving the end node of `road`, excluding the immediate U-turn.
  std::vector<RoadId> successors(RoadId road) const;

  // Shortest route (by length) from `origin` to `destination`, both
  // inclusive. Throws if unreachable.
  std::vector<RoadId> route(RoadId origin, RoadId destination) const;

  double longest_road() const;

  // Throws cotv::Error when the structural invariants do not hold.
  void validate() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Road> roads_;
  std::vector<Intersection> intersections_;
  std::vector<std::vector<RoadId>> out_roads_;
};

// Grid of rows x cols signalized intersections named I<r>_<c>. Perimeter
// roads end at boundary nodes N<c>, S<c>, W<r>, E<r>. Road names are
// "<from>-><to>".
RoadNetwork build_grid(int rows, int cols, double road_length,
                       double speed_limit);

}  // namespace cotv

#endif  // COTV_NET_NETWORK_HPP_
