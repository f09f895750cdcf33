#include "cotv/net/network.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <utility>

#include "cotv/error.hpp"

namespace cotv {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidArgument:
      return "invalid-argument";
    case ErrorCategory::kConfig:
      return "config";
    case ErrorCategory::kParse:
      return "parse";
    case ErrorCategory::kShapeMismatch:
      return "shape-mismatch";
    case ErrorCategory::kSimulation:
      return "simulation";
    case ErrorCategory::kNumerical:
      return "numerical";
    case ErrorCategory::kIo:
      return "io";
  }
  return "unknown";
}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Road> roads,
                         std::vector<Intersection> intersections)
    : nodes_(std::move(nodes)),
      roads_(std::move(roads)),
      intersections_(std::move(intersections)),
      out_roads_(nodes_.size()) {
  for (const Road& r : roads_) {
    if (r.from_node >= nodes_.size() || r.to_node >= nodes_.size()) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "road " + r.name + " references an unknown node");
    }
    out_roads_[r.from_node].push_back(r.id);
  }
  validate();
}

std::optional<RoadId> RoadNetwork::find_road(const std::string& name) const {
  for (const Road& r : roads_) {
    if (r.name == name) return r.id;
  }
  return std::nullopt;
}

std::optional<NodeId> RoadNetwork::find_node(const std::string& name) const {
  for (const Node& n : nodes_) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

std::vector<RoadId> RoadNetwork::successors(RoadId road_id) const {
  const Road& r = road(road_id);
  std::vector<RoadId> out;
  for (RoadId next : out_roads_[r.to_node]) {
    const Road& n = roads_[next];
    if (n.to_node == r.from_node && n.from_node == r.to_node &&
        out_roads_[r.to_node].size() > 1) {
      continue;
    }
    out.push_back(next);
  }
  return out;
}

std::vector<RoadId> RoadNetwork::route(RoadId origin,
                                       RoadId destination) const {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(roads_.size(), inf);
  std::vector<RoadId> prev(roads_.size(), roads_.size());
  using Entry = std::pair<double, RoadId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist.at(origin) = road(origin).length;
  open.emplace(dist[origin], origin);
  while (!open.empty()) {
    auto [d, cur] = open.top();
    open.pop();
    if (d > dist[cur]) continue;
    if (cur == destination) break;
    for (RoadId next : successors(cur)) {
      double nd = d + roads_[next].length;
      if (nd < dist[next]) {
        dist[next] = nd;
        prev[next] = cur;
        open.emplace(nd, next);
      }
    }
  }
  if (dist.at(destination) == inf) {
    throw Error(ErrorCategory::kInvalidArgument,
                "no route from " + road(origin).name + " to " +
                    road(destination).name);
  }
  std::vector<RoadId> path;
  for (RoadId cur = destination; cur != roads_.size(); cur = prev[cur]) {
    path.push_back(cur);
    if (cur == origin) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double RoadNetwork::longest_road() const {
  double longest = 0.0;
  for (const Road& r : roads_) longest = std::max(longest, r.length);
  return longest;
}

void RoadNetwork::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCategory::kInvalidArgument, msg);
  };
  for (std::size_t i = 0; i < roads_.size(); ++i) {
    const Road& r = roads_[i];
    if (r.id != i) fail("road ids must be dense and ordered");
    if (!(r.length > 0.0)) fail("road " + r.name + " has non-positive length");
    if (!(r.speed_limit > 0.0)) {
      fail("road " + r.name + " has non-positive speed limit");
    }
    if (r.approach_intersection &&
        *r.approach_intersection >= intersections_.size()) {
      fail("road " + r.name + " approaches an unknown intersection");
    }
  }
  for (std::size_t i = 0; i < intersections_.size(); ++i) {
    const Intersection& x = intersections_[i];
    if (x.id != i) fail("intersection ids must be dense and ordered");
    if (x.incoming.empty() || x.outgoing.empty()) {
      fail("intersection without incoming or outgoing roads");
    }
    std::set<RoadId> in(x.incoming.begin(), x.incoming.end());
    for (RoadId r : x.outgoing) {
      if (r >= roads_.size()) fail("intersection references unknown road");
      if (in.count(r)) fail("road both incoming and outgoing");
    }
    for (RoadId r : x.incoming) {
      if (r >= roads_.size()) fail("intersection references unknown road");
    }
    if (!x.through.empty()) {
      if (x.through.size() != x.incoming.size()) {
        fail("through list must align with incoming roads");
      }
      for (RoadId r : x.through) {
        if (std::find(x.outgoing.begin(), x.outgoing.end(), r) ==
            x.outgoing.end()) {
          fail("through road is not outgoing");
        }
      }
    }
    for (const auto& group : x.phase_groups) {
      for (RoadId r : group) {
        if (!in.count(r)) fail("phase serves a non-incoming road");
      }
    }
  }
  if (nodes_.empty()) return;
  // Undirected connectivity over nodes.
  std::vector<std::vector<NodeId>> adj(nodes_.size());
  for (const Road& r : roads_) {
    adj[r.from_node].push_back(r.to_node);
    adj[r.to_node].push_back(r.from_node);
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    for (NodeId m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        stack.push_back(m);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    fail("network is not connected");
  }
}

RoadNetwork build_grid(int rows, int cols, double road_length,
                       double speed_limit) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCategory::kInvalidArgument,
                "grid dimensions must be at least 1x1");
  }
  if (!(road_length > 0.0) || !(speed_limit > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument,
                "road length and speed limit must be positive");
  }

  std::vector<Node> nodes;
  std::vector<Intersection> intersections;
  auto add_node = [&](std::string name) {
    NodeId id = nodes.size();
    nodes.push_back(Node{id, std::move(name), std::nullopt});
    return id;
  };

  std::vector<std::vector<NodeId>> grid(rows, std::vector<NodeId>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      NodeId id = add_node("I" + std::to_string(r) + "_" + std::to_string(c));
      nodes[id].intersection = intersections.size();
      intersections.push_back(Intersection{intersections.size(), id, {}, {}, {}, {}});
      grid[r][c] = id;
    }
  }
  std::vector<NodeId> north(cols), south(cols), west(rows), east(rows);
  for (int c = 0; c < cols; ++c) north[c] = add_node("N" + std::to_string(c));
  for (int c = 0; c < cols; ++c) south[c] = add_node("S" + std::to_string(c));
  for (int r = 0; r < rows; ++r) west[r] = add_node("W" + std::to_string(r));
  for (int r = 0; r < rows; ++r) east[r] = add_node("E" + std::to_string(r));

  auto neighbour = [&](int r, int c, Approach a) -> NodeId {
    switch (a) {
      case Approach::kNorth:
        return r == 0 ? north[c] : grid[r - 1][c];
      case Approach::kEast:
        return c == cols - 1 ? east[r] : grid[r][c + 1];
      case Approach::kSouth:
        return r == rows - 1 ? south[c] : grid[r + 1][c];
      case Approach::kWest:
        return c == 0 ? west[r] : grid[r][c - 1];
    }
    return 0;
  };

  std::vector<Road> roads;
  auto road_between = [&](NodeId from, NodeId to) -> RoadId {
    for (const Road& rd : roads) {
      if (rd.from_node == from && rd.to_node == to) return rd.id;
    }
    RoadId id = roads.size();
    Road rd;
    rd.id = id;
    rd.name = nodes[from].name + "->" + nodes[to].name;
    rd.from_node = from;
    rd.to_node = to;
    rd.length = road_length;
    rd.speed_limit = speed_limit;
    rd.approach_intersection = nodes[to].intersection;
    roads.push_back(std::move(rd));
    return id;
  };

  constexpr Approach kOrder[] = {Approach::kNorth, Approach::kEast,
                                 Approach::kSouth, Approach::kWest};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      NodeId self = grid[r][c];
      Intersection& x = intersections[*nodes[self].intersection];
      for (Approach a : kOrder) {
        NodeId other = neighbour(r, c, a);
        x.incoming.push_back(road_between(other, self));
        x.outgoing.push_back(road_between(self, other));
      }
      for (std::size_t k = 0; k < x.incoming.size(); ++k) {
        x.through.push_back(x.outgoing[(k + 2) % 4]);
      }
      x.phase_groups = {
          {x.incoming[static_cast<int>(Approach::kNorth)],
           x.incoming[static_cast<int>(Approach::kSouth)]},
          {x.incoming[static_cast<int>(Approach::kWest)],
           x.incoming[static_cast<int>(Approach::kEast)]},
      };
    }
  }
  return RoadNetwork(std::move(nodes), std::move(roads),
                     std::move(intersections));
}

}  // namespace cotv
