#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "../support/fixtures.hpp"
#include "cotv/env/environment.hpp"
#include "cotv/metrics/report.hpp"

using namespace cotv;
using namespace cotv::test;

namespace {

TripRecord trip(double depart, double arrival, double ideal, double fuel,
                double dist, double co2 = 0.0) {
  TripRecord t;
  t.depart = depart;
  t.arrival = arrival;
  t.ideal_time = ideal;
  t.fuel = fuel;
  t.distance = dist;
  t.route_length = dist;
  t.co2 = co2;
  return t;
}

EpisodeReport run_static(std::uint64_t seed, int horizon = 720) {
  ScenarioSpec spec = standard_scenario_1x1();
  spec.horizon = horizon;
  EnvConfig cfg;
  cfg.lights = LightControl::kStatic;
  cfg.vehicles = VehicleControl::kNone;
  Environment env(grid(), spec, cfg, seed);
  std::mt19937_64 rng(0);
  while (!env.done()) env.step({}, rng);
  return make_episode_report(env.sim(), seed);
}

}  // namespace

TEST_CASE("travel time and delay means") {
  const std::vector<TripRecord> trips{trip(0, 40, 30, 0, 600), trip(10, 70, 35, 0, 600)};
  const TravelTimeStats s = travel_time_stats(trips);
  CHECK(s.mean == 50.0);
  CHECK(s.per_vehicle == std::vector<double>{40, 60});
  CHECK(delay_stats(trips) == doctest::Approx(0.5 * (10 + 25)));
  CHECK(delay_stats({trip(0, 30, 20, 0, 1), trip(0, 40, 20, 0, 1)}) == 15.0);
  CHECK(delay_stats({}) == 0.0);
  CHECK_THROWS_AS(travel_time_stats({}), Error);
}

TEST_CASE("free-flow time of a straight route") {
  const auto net = grid();
  CHECK(ideal_travel_time(*net, route(*net, kNorthIn, kSouthOut)) == doctest::Approx(40.0));
  const auto slow = grid(1, 6, 300, 10);
  CHECK(ideal_travel_time(*slow, route(*slow, "W0->I0_0", "I0_5->E0")) ==
        doctest::Approx(210.0));
}

TEST_CASE("fleet fuel and CO2 ratios") {
  // 1 l over 10 km is 10 l/100km; 2392 g over 1 km is 2392 g/km.
  CHECK(fuel_per_100km({trip(0, 1, 1, 0.4, 4000), trip(0, 1, 1, 0.6, 6000)}) ==
        doctest::Approx(10.0));
  CHECK(co2_per_km({trip(0, 1, 1, 1.0, 1000, 2392.0)}) == doctest::Approx(2392.0));
  CHECK_THROWS_AS(fuel_per_100km({trip(0, 1, 1, 0.4, 0)}), Error);
  CHECK_THROWS_AS(co2_per_km({}), Error);
}

TEST_CASE("efficiency ratios are scale invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TripRecord> a, b;
    const double k = 1.0 + 9.0 * u(rng);
    for (int i = 0; i < 5; ++i) {
      const double f = u(rng), d = 1000 * u(rng), g = 2392 * f;
      a.push_back(trip(0, 1, 1, f, d, g));
      b.push_back(trip(0, 1, 1, k * f, k * d, k * g));
    }
    CHECK(fuel_per_100km(a) == doctest::Approx(fuel_per_100km(b)));
    CHECK(co2_per_km(a) == doctest::Approx(co2_per_km(b)));
    CHECK(co2_per_km(a) == doctest::Approx(23.92 * fuel_per_100km(a)));
  }
}

TEST_CASE("percent change examples") {
  CHECK(percent_change(59.67, 48.42) == doctest::Approx(-18.85).epsilon(1e-3));
  CHECK(percent_change(141.0, 12.0) == doctest::Approx(-91.49).epsilon(1e-3));
  CHECK(percent_change(10.0, 10.0) == 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double base = u(rng), v = u(rng);
    const double p = percent_change(base, v);
    CHECK(base * (1 + p / 100) == doctest::Approx(v));
  }
}

TEST_CASE("aggregation skips NaN and ignores episode order") {
  EpisodeReport a, b, c;
  a.mean_travel_time = 50;
  a.ttc_events = 4;
  a.travel_times = {1, 2};
  b.mean_travel_time = 70;
  b.ttc_events = 1;
  b.travel_times = {3};
  c.mean_travel_time = std::numeric_limits<double>::quiet_NaN();
  c.ttc_events = 1;
  const EpisodeReport m = aggregate_reports({a, b, c});
  CHECK(m.mean_travel_time == 60.0);
  CHECK(m.ttc_events == 2.0);
  CHECK(m.travel_times.size() == 3);
  const EpisodeReport p = aggregate_reports({c, b, a});
  CHECK(p.mean_travel_time == m.mean_travel_time);
  CHECK(p.ttc_events == m.ttc_events);
  CHECK_THROWS_AS(aggregate_reports({}), Error);
}

TEST_CASE("comparison table against a baseline") {
  EpisodeReport base, better;
  base.mean_travel_time = 59.67;
  better.mean_travel_time = 48.42;
  base.ttc_events = 141;
  better.ttc_events = 12;
  const auto rows = compare_table({{"baseline-static", base}, {"cotv", better}},
                                  "baseline-static");
  const auto find = [&](const std::string& method, const std::string& metric) {
    return *std::find_if(rows.begin(), rows.end(), [&](const MetricRow& r) {
      return r.method == method && r.metric == metric;
    });
  };
  CHECK(find("cotv", "travel_time").change_pct == doctest::Approx(-18.85).epsilon(1e-3));
  CHECK(find("cotv", "ttc_events").change_pct == doctest::Approx(-91.49).epsilon(1e-3));
  CHECK(find("baseline-static", "travel_time").change_pct == 0.0);
  CHECK(find("cotv", "travel_time").unit == "s");
  CHECK_THROWS_AS(compare_table({{"cotv", better}}, "baseline-static"), Error);

  std::ostringstream csv, text;
  write_table_csv(csv, rows);
  write_table_text(text, rows);
  CHECK(csv.str().find("cotv,travel_time") != std::string::npos);
  CHECK(text.str().find("-18.85") != std::string::npos);
}

TEST_CASE("report JSON round-trips, NaN included") {
  EpisodeReport r;
  r.seed = 99;
  r.mean_travel_time = 51.25;
  r.mean_delay = std::numeric_limits<double>::quiet_NaN();
  r.fuel_l_per_100km = 8.5;
  r.co2_g_per_km = 203.3;
  r.ttc_events = 3;
  r.completed = 60;
  r.inserted = 70;
  r.travel_times = {40.0, 62.5};
  const EpisodeReport back = report_from_json(report_to_json(r));
  CHECK(back.seed == 99);
  CHECK(back.mean_travel_time == r.mean_travel_time);
  CHECK(std::isnan(back.mean_delay));
  CHECK(back.co2_g_per_km == r.co2_g_per_km);
  CHECK(back.travel_times == r.travel_times);
  CHECK_THROWS_AS(report_from_json("{not json"), Error);
}

TEST_CASE("episode reports agree with the simulation") {
  ScenarioSpec spec = standard_scenario_1x1();
  EnvConfig cfg;
  cfg.lights = LightControl::kStatic;
  cfg.vehicles = VehicleControl::kNone;
  Environment env(grid(), spec, cfg, 3);
  std::mt19937_64 rng(0);
  while (!env.done()) env.step({}, rng);
  const Simulation& sim = env.sim();
  const EpisodeReport r = make_episode_report(sim, 3);
  CHECK(r.ttc_events == static_cast<double>(sim.ttc_events_total()));
  CHECK(r.completed == static_cast<double>(sim.trips().size()));
  CHECK(r.inserted + static_cast<double>(sim.pending()) == 70.0);
  CHECK(r.completed + r.collided + static_cast<double>(sim.vehicles().size()) == r.inserted);
  for (const TripRecord& t : sim.trips()) {
    CHECK(t.travel_time() - t.ideal_time >= -1.0);
    CHECK(t.ideal_time == doctest::Approx(ideal_travel_time(sim.network(), route(sim.network(), kNorthIn, kSouthOut))));
  }
}

TEST_CASE("an episode with no completions reports NaN means") {
  const EpisodeReport r = run_static(1, 30);
  CHECK(r.completed == 0.0);
  CHECK(std::isnan(r.mean_travel_time));
  CHECK(std::isnan(r.fuel_l_per_100km));
}
