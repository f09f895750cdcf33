#ifndef COTV_RL_TRAINER_HPP_
#define COTV_RL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "cotv/env/environment.hpp"
#include "cotv/metrics/report.hpp"
#include "cotv/rl/ppo.hpp"

namespace cotv {

// splitmix64 finalizer over (a, b); used for every derived seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Seed of the scenario draw (vehicle kinds, insertion speeds) for one
// training episode.
std::uint64_t episode_seed(std::uint64_t seed, int iteration, int episode);

// Distinct per-episode evaluation seeds, disjoint from training seeds.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, int count);

// Worker threads: COTV_WORKERS when set, else hardware concurrency.
int default_workers();

struct TrainSpec {
  ScenarioSpec scenario;
  EnvConfig env;
  PpoConfig ppo;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct IterationLog {
  int iteration = 0;
  // Mean reward per agent step; NaN when the type collected nothing.
  double tl_mean_reward = 0.0;
  double cav_mean_reward = 0.0;
  // Summed reward per episode.
  double tl_episode_reward = 0.0;
  double cav_episode_reward = 0.0;
  std::size_t tl_steps = 0;
  std::size_t cav_steps = 0;
  std::size_t cav_segments = 0;
  double rollout_seconds = 0.0;
  double update_seconds = 0.0;
  double wall_seconds = 0.0;
  UpdateStats tl_update;
  UpdateStats cav_update;
};

struct TrainResult {
  ActorCritic lights;    // empty unless lights are learned
  ActorCritic vehicles;  // empty unless vehicles are learned
  std::vector<IterationLog> curve;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(const IterationLog&)>;

// Alternates parallel rollouts and PPO updates for every learned agent
// type. The result depends only on the spec, not on the worker count.
TrainResult train(const TrainSpec& spec, const ProgressFn& progress = {});

struct EvalSpec {
  ScenarioSpec scenario;
  EnvConfig env;
  const ActorCritic* lights = nullptr;
  const ActorCritic* vehicles = nullptr;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
  // Trajectory trace of the first episode.
  std::ostream* trace = nullptr;
};

// One greedy episode per seed, reports in seed order.
std::vector<EpisodeReport> evaluate(const EvalSpec& spec);

// Per-iteration curve as CSV.
void write_curve_csv(std::ostream& out, const std::vector<IterationLog>& curve);

}  // namespace cotv

#endif  // COTV_RL_TRAINER_HPP_
