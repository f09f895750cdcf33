#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "../support/fixtures.hpp"

using namespace cotv;
using namespace cotv::test;

TEST_CASE("1x1 grid has one intersection with four roads in and four out") {
  const RoadNetwork net = build_grid(1, 1, 300, 15);
  REQUIRE(net.intersections().size() == 1);
  CHECK(net.roads().size() == 8);
  for (const Road& r : net.roads()) {
    CHECK(r.length == 300.0);
    CHECK(r.speed_limit == 15.0);
  }
  const Intersection& x = net.intersection(0);
  CHECK(x.incoming.size() == 4);
  CHECK(x.outgoing.size() == 4);
}

TEST_CASE("incoming and outgoing sets have size four for any length and limit") {
  for (double len : {50.0, 123.4, 1000.0}) {
    for (double limit : {5.0, 13.9, 30.0}) {
      const RoadNetwork net = build_grid(1, 1, len, limit);
      CHECK(net.intersection(0).incoming.size() == 4);
      CHECK(net.intersection(0).outgoing.size() == 4);
    }
  }
}

TEST_CASE("1x6 grid shares each interior edge between neighbours") {
  const RoadNetwork net = build_grid(1, 6, 300, 15);
  REQUIRE(net.intersections().size() == 6);
  // 6 x (N in/out + S in/out) + 2 x 7 horizontal links.
  CHECK(net.roads().size() == 6 * 4 + 2 * 7);
  for (int c = 0; c + 1 < 6; ++c) {
    const std::string east = "I0_" + std::to_string(c) + "->I0_" + std::to_string(c + 1);
    const RoadId r = road(net, east);
    const Intersection& left = net.intersection(static_cast<std::size_t>(c));
    const Intersection& right = net.intersection(static_cast<std::size_t>(c + 1));
    CHECK(std::count(left.outgoing.begin(), left.outgoing.end(), r) == 1);
    CHECK(std::count(right.incoming.begin(), right.incoming.end(), r) == 1);
  }
}

TEST_CASE("every intersection has as many incoming as outgoing roads") {
  for (auto [rows, cols] : {std::pair{1, 1}, {1, 6}, {2, 3}, {3, 3}}) {
    const RoadNetwork net = build_grid(rows, cols, 300, 15);
    for (const Intersection& x : net.intersections()) {
      CHECK(x.incoming.size() == x.outgoing.size());
    }
  }
}

TEST_CASE("through roads lie straight across") {
  const RoadNetwork net = build_grid(1, 1, 300, 15);
  const Intersection& x = net.intersection(0);
  for (std::size_t k = 0; k < x.incoming.size(); ++k) {
    CHECK(x.through[k] == x.outgoing[(k + 2) % 4]);
  }
  CHECK(x.through[0] == road(net, kSouthOut));
}

TEST_CASE("routes go straight through a row of intersections") {
  const RoadNetwork net = build_grid(1, 6, 300, 15);
  const auto r = net.route(road(net, "W0->I0_0"), road(net, "I0_5->E0"));
  CHECK(r.size() == 7);
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    CHECK(net.road(r[k]).to_node == net.road(r[k + 1]).from_node);
  }
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid(0, 1, 300, 15), Error);
  CHECK_THROWS_AS(build_grid(1, 1, -1, 15), Error);
  CHECK_THROWS_AS(build_grid(1, 1, 300, 0), Error);
}
