#include <doctest.h>

#include <random>

#include "../support/fixtures.hpp"
#include "cotv/control/baselines.hpp"
#include "cotv/env/environment.hpp"

using namespace cotv;
using namespace cotv::test;

namespace {

TrafficLight at(const Simulation& sim, std::size_t phase, double t) {
  TrafficLight l = sim.light(0);
  l.current = phase;
  l.time_in_phase = t;
  return l;
}

void queue(Simulation& sim, const char* on, int n, double front = 290.0) {
  for (int k = 0; k < n; ++k) {
    VehiclePlacement p;
    p.route = {road(sim.network(), on)};
    p.position = front - 8.0 * k;
    sim.place_vehicle(p);
  }
}

// Run `ticks` seconds of actuated decisions with the light held in green,
// `detected(t)` saying whether a vehicle sits inside the detection zone.
int first_switch(bool (*detected)(int), int ticks = 60) {
  Simulation empty = empty_sim();
  Simulation busy = empty_sim();
  queue(busy, kNorthIn, 1, 280.0);
  ActuatedConfig cfg;
  ActuatedState state;
  for (int t = 0; t < ticks; ++t) {
    const Simulation& s = detected(t) ? busy : empty;
    if (actuated_tick(at(s, 0, t), s, cfg, state) == 1) return t;
  }
  return -1;
}

}  // namespace

TEST_CASE("static plan switches exactly at the planned green") {
  Simulation sim = empty_sim();
  StaticPlan plan;
  CHECK(static_tick(at(sim, 0, 40), plan) == 1);
  CHECK(static_tick(at(sim, 0, 12), plan) == 0);
  CHECK(static_tick(at(sim, 0, 39), plan) == 0);
  CHECK(static_tick(at(sim, 1, 5), plan) == 0);
  CHECK(plan.cycle_length(2) == 86.0);
}

TEST_CASE("static control repeats an 86 s cycle") {
  ScenarioSpec spec;
  spec.horizon = 720;
  EnvConfig cfg;
  cfg.lights = LightControl::kStatic;
  cfg.vehicles = VehicleControl::kNone;
  Environment env(grid(), spec, cfg, 0);
  std::mt19937_64 rng(0);
  std::vector<int> starts;
  std::size_t prev = 0;
  int green_ns = 0;
  while (!env.done()) {
    CHECK(env.step({}, rng).empty());
    const TrafficLight& l = env.sim().light(0);
    if (l.current == 0 && prev != 0) starts.push_back(env.steps());
    if (l.current == 0) ++green_ns;
    prev = l.current;
  }
  REQUIRE(starts.size() >= 7);
  for (std::size_t k = 1; k < starts.size(); ++k) CHECK(starts[k] - starts[k - 1] == 86);
  // 8 full cycles plus the head of the 9th: 40 s greens each.
  CHECK(green_ns == 8 * 40 + std::min(40, 720 - 8 * 86));
}

TEST_CASE("actuated control gaps out, extends for a platoon and maxes out") {
  // No traffic: switches as soon as min green allows.
  CHECK(first_switch([](int) { return false; }) == 5);
  // Continuous detections hold green until max green.
  CHECK(first_switch([](int) { return true; }) == 45);
  // Last detection at t = 9; undetected at 10, 11, 12 gaps out.
  CHECK(first_switch([](int t) { return t < 10; }) == 12);
  // Yellow ignores detectors.
  Simulation sim = empty_sim();
  ActuatedState st;
  CHECK(actuated_tick(at(sim, 1, 2), sim, ActuatedConfig{}, st) == 0);
  CHECK_THROWS_AS(ActuatedConfig{.max_green = 4.0}.validate(5.0), Error);
}

TEST_CASE("max pressure picks the heavier phase after min green") {
  Simulation sim = empty_sim();
  queue(sim, kNorthIn, 2);
  queue(sim, kWestIn, 7);
  CHECK(phase_pressure(sim, sim.light(0), 0) == 2.0);
  CHECK(phase_pressure(sim, sim.light(0), 2) == 7.0);
  CHECK(max_pressure_tick(at(sim, 0, 10), sim, 5.0) == 1);
  CHECK(max_pressure_tick(at(sim, 0, 3), sim, 5.0) == 0);
  CHECK(max_pressure_tick(at(sim, 2, 10), sim, 5.0) == 0);
  CHECK(max_pressure_tick(at(sim, 1, 10), sim, 5.0) == 0);

  // Downstream queues push pressure down; a tie keeps the current phase.
  Simulation tie = empty_sim();
  queue(tie, kNorthIn, 4);
  queue(tie, kWestIn, 6);
  queue(tie, kEastOut, 2);
  CHECK(phase_pressure(tie, tie.light(0), 2) == 4.0);
  CHECK(max_pressure_tick(at(tie, 0, 10), tie, 5.0) == 0);
}

TEST_CASE("signal forecast from a fixed schedule") {
  Simulation sim = empty_sim();
  const RoadId n = road(sim.network(), kNorthIn);
  const RoadId w = road(sim.network(), kWestIn);
  SignalForecast f = forecast_signal(at(sim, 0, 10), n, 40.0);
  CHECK(f.green_now);
  CHECK(f.green_remaining == 30.0);
  f = forecast_signal(at(sim, 0, 10), w, 40.0);
  CHECK_FALSE(f.green_now);
  CHECK(f.time_to_green == 33.0);
  CHECK(forecast_signal(at(sim, 1, 1), w, 40.0).time_to_green == 2.0);
  CHECK(forecast_signal(at(sim, 2, 0), n, 40.0).time_to_green == 43.0);
}

TEST_CASE("arrival time under a launch acceleration") {
  CHECK(arrival_time(15, 150, 15, 1.0) == doctest::Approx(10.0));
  CHECK(arrival_time(0, 50, 15, 1.0) == doctest::Approx(10.0));
  // 7.5 s ramp covers 84.375 m, the remaining 15.625 m at 15 m/s.
  CHECK(arrival_time(7.5, 100, 15, 1.0) == doctest::Approx(7.5 + 15.625 / 15));
  CHECK(arrival_time(5, 0, 15, 1.0) == 0.0);
}

TEST_CASE("GLOSA advisory examples") {
  // Red for 10 s, 100 m out at 15 m/s: target 10 m/s, braking capped at -3.
  SignalForecast red10{false, 0.0, 10.0};
  CHECK(glosa_advice(15, 100, red10, 15, 0.7) == -3.0);
  // Red for 60 s, 30 m out: target 0.5 m/s.
  SignalForecast red60{false, 0.0, 60.0};
  CHECK(glosa_advice(2.0, 30, red60, 15, 0.7) == doctest::Approx(-1.5));
  CHECK(glosa_advice(0.0, 30, red60, 15, 0.7) == doctest::Approx(0.5));
  // Makes the current green: defers to the car-following model.
  SignalForecast green{true, 20.0, 26.0};
  CHECK(glosa_advice(15, 100, green, 15, 0.7) == 0.7);
  // Misses it: aims for the next one.
  CHECK(glosa_advice(10, 290, green, 15, 0.7) == doctest::Approx(290.0 / 26 - 10));
}

TEST_CASE("GLOSA advice stays inside the command bounds") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    SignalForecast f{u(rng) < 0.5, 40 * u(rng), 90 * u(rng)};
    const double idm = -4.5 + 5.5 * u(rng);
    const double a = glosa_advice(15 * u(rng), 300 * u(rng), f, 15, std::clamp(idm, -3.0, 1.0));
    CHECK(a >= -3.0);
    CHECK(a <= 3.0);
  }
}
