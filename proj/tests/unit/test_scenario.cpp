#include <doctest.h>

#include <cmath>
#include <map>

#include "../support/fixtures.hpp"

using namespace cotv;
using namespace cotv::test;

namespace {

const FlowSpec& flow_from(const std::vector<FlowSpec>& flows, const std::string& origin) {
  for (const FlowSpec& f : flows) {
    if (f.origin == origin) return f;
  }
  throw Error(ErrorCategory::kInvalidArgument, "no flow from " + origin);
}

}  // namespace

TEST_CASE("1x1 demand totals 70 vehicles") {
  CHECK(total_vehicles(standard_flows_1x1()) == 70);
}

TEST_CASE("north-south flow starts at 45 s") {
  CHECK(flow_from(standard_flows_1x1(), kNorthIn).start_time == 45.0);
}

TEST_CASE("1x1 per-flow counts follow rate x 300 s / 3600") {
  // Oracle: hourly rates 288/240/192/120 over a 300 s window.
  const auto flows = standard_flows_1x1();
  const std::map<std::string, double> rate{
      {kNorthIn, 288.0}, {kWestIn, 240.0}, {kEastIn, 192.0}, {kSouthIn, 120.0}};
  int sum = 0;
  for (const auto& [origin, r] : rate) {
    const int expected = static_cast<int>(std::lround(r * 300.0 / 3600.0));
    CHECK(flow_from(flows, origin).count == expected);
    sum += expected;
  }
  CHECK(sum == 70);
  CHECK(flow_from(flows, kNorthIn).count == 24);
  CHECK(flow_from(flows, kWestIn).count == 20);
  CHECK(flow_from(flows, kEastIn).count == 16);
  CHECK(flow_from(flows, kSouthIn).count == 10);
  // E->W starts one minute after N->S.
  CHECK(flow_from(flows, kEastIn).start_time == 105.0);
}

TEST_CASE("1x6 demand totals 240 = 20 + 16 + 6 x (24 + 10)") {
  const auto flows = standard_flows_1x6();
  CHECK(total_vehicles(flows) == 20 + 16 + 6 * (24 + 10));
  CHECK(total_vehicles(flows) == 240);
  CHECK(flow_from(flows, "N2->I0_2").count == 24);
}

TEST_CASE("every standard flow is a go-straight route") {
  const RoadNetwork net = build_grid(1, 6, 300, 15);
  for (const FlowSpec& f : standard_flows_1x6()) {
    const auto r = route(net, f.origin, f.destination);
    REQUIRE(r.size() >= 2);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      const Node& at = net.nodes()[net.road(r[k]).to_node];
      REQUIRE(at.intersection.has_value());
      const Intersection& x = net.intersection(*at.intersection);
      auto it = std::find(x.incoming.begin(), x.incoming.end(), r[k]);
      REQUIRE(it != x.incoming.end());
      CHECK(x.through[static_cast<std::size_t>(it - x.incoming.begin())] == r[k + 1]);
    }
  }
}

TEST_CASE("vehicle kinds follow the penetration rate") {
  const RoadNetwork net = build_grid(1, 1, 300, 15);
  const auto flows = standard_flows_1x1();
  auto count_cav = [](const InsertionSchedule& s) {
    return std::count_if(s.begin(), s.end(),
                         [](const PlannedVehicle& v) { return v.kind == VehicleKind::kCav; });
  };
  CHECK(count_cav(assign_vehicle_kinds(net, flows, 0.0, 1)) == 0);
  CHECK(count_cav(assign_vehicle_kinds(net, flows, 1.0, 1)) == 70);
  CHECK(count_cav(assign_vehicle_kinds(net, flows, 0.4, 1)) == 28);
  CHECK_THROWS_AS(assign_vehicle_kinds(net, flows, 1.5, 1), Error);
}

TEST_CASE("schedules are pure functions of spec and seed") {
  const RoadNetwork net = build_grid(1, 1, 300, 15);
  const auto flows = standard_flows_1x1();
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    const auto a = assign_vehicle_kinds(net, flows, 0.5, seed);
    const auto b = assign_vehicle_kinds(net, flows, 0.5, seed);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].time == b[i].time);
      CHECK(a[i].kind == b[i].kind);
      CHECK(a[i].initial_speed == b[i].initial_speed);
      CHECK(a[i].route == b[i].route);
    }
  }
  const auto a = assign_vehicle_kinds(net, flows, 0.5, 1);
  const auto b = assign_vehicle_kinds(net, flows, 0.5, 2);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    differs = differs || a[i].kind != b[i].kind || a[i].initial_speed != b[i].initial_speed;
  }
  CHECK(differs);
}

TEST_CASE("schedule is time ordered with speeds in [0, limit]") {
  const RoadNetwork net = build_grid(1, 1, 300, 15);
  const auto s = assign_vehicle_kinds(net, standard_flows_1x1(), 0.3, 9);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) CHECK(s[i - 1].time <= s[i].time);
    CHECK(s[i].initial_speed >= 0.0);
    CHECK(s[i].initial_speed <= 15.0);
  }
}

TEST_CASE("scenario text round-trips") {
  ScenarioSpec spec = standard_scenario_1x6();
  spec.penetration_rate = 0.6;
  spec.seed = 42;
  spec.horizon = 500;
  const ScenarioSpec back = parse_scenario(format_scenario(spec));
  CHECK(back.grid.rows == 1);
  CHECK(back.grid.cols == 6);
  CHECK(back.horizon == 500);
  CHECK(back.penetration_rate == 0.6);
  CHECK(back.seed == 42);
  REQUIRE(back.flows.size() == spec.flows.size());
  for (std::size_t i = 0; i < spec.flows.size(); ++i) {
    CHECK(back.flows[i].origin == spec.flows[i].origin);
    CHECK(back.flows[i].count == spec.flows[i].count);
    CHECK(back.flows[i].period == spec.flows[i].period);
    CHECK(back.flows[i].start_time == spec.flows[i].start_time);
  }
}

TEST_CASE("scenario parser reports line numbers") {
  const std::string text =
      "# demo\n"
      "network { grid: 1x1 }\n"
      "flow { origin: N0->I0_0, destination: I0_0->S0, count: 3, start: 0, period: 5, colour: red }\n";
  try {
    parse_scenario(text);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("flow { origin: a }"), Error);
  CHECK_THROWS_AS(parse_scenario("network { grid: 1x1 }\nsim { horizon: -4 }"), Error);
}
