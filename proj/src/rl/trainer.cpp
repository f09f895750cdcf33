#include "cotv/rl/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <thread>

#include "cotv/error.hpp"

namespace cotv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs f(0..n-1) over up to `workers` threads. The first exception thrown
// by any task is rethrown after all threads join.
template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

struct EpisodeRecords {
  std::vector<AgentStep> lights;
  std::vector<AgentStep> vehicles;
};

void check_shape(const ActorCritic* net, std::size_t obs_dim, const char* what) {
  if (net != nullptr && static_cast<std::size_t>(net->obs_dim()) != obs_dim) {
    throw Error(ErrorCategory::kShapeMismatch,
                std::string(what) + " policy expects " +
                    std::to_string(net->obs_dim()) + " inputs, environment gives " +
                    std::to_string(obs_dim));
  }
}

double mean_reward(const std::vector<AgentStep>& steps, double& sum) {
  sum = 0.0;
  for (const AgentStep& s : steps) sum += s.reward;
  return steps.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : sum / static_cast<double>(steps.size());
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t episode_seed(std::uint64_t seed, int iteration, int episode) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(iteration)),
                  static_cast<std::uint64_t>(episode));
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, int count) {
  std::vector<std::uint64_t> out;
  const std::uint64_t base = mix_seed(seed, 0xe7a1ULL << 32);
  for (int k = 0; k < count; ++k) {
    out.push_back(mix_seed(base, static_cast<std::uint64_t>(k)));
  }
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("COTV_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw Error(ErrorCategory::kConfig,
                  "COTV_WORKERS must be a positive integer");
    }
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrainResult train(const TrainSpec& spec, const ProgressFn& progress) {
  spec.ppo.validate();
  spec.env.validate();
  const bool learn_lights = spec.env.lights == LightControl::kLearned;
  const bool learn_vehicles = spec.env.vehicles == VehicleControl::kLearned;
  if (!learn_lights && !learn_vehicles) {
    throw Error(ErrorCategory::kConfig, "nothing to train: no learned agents");
  }
  ScenarioSpec scenario = spec.scenario;
  scenario.horizon = spec.ppo.horizon;
  scenario.validate();
  auto network = std::make_shared<const RoadNetwork>(build_network(scenario.grid));

  TrainResult result;
  Adam adam_lights, adam_vehicles;
  if (learn_lights) {
    result.lights = ActorCritic(
        static_cast<int>(shared_tl_observation_size(*network, spec.env.mode)),
        ActionHead::kBernoulli, mix_seed(spec.seed, 1), spec.ppo.hidden);
    adam_lights = Adam(result.lights.num_params(), spec.ppo.learning_rate);
  }
  if (learn_vehicles) {
    result.vehicles = ActorCritic(
        static_cast<int>(cav_observation_size(spec.env.mode)),
        ActionHead::kGaussian, mix_seed(spec.seed, 2), spec.ppo.hidden);
    adam_vehicles = Adam(result.vehicles.num_params(), spec.ppo.learning_rate);
  }

  const auto t_start = Clock::now();
  const int n_episodes = spec.ppo.episodes;
  for (int it = 0; it < spec.ppo.iterations; ++it) {
    const auto t0 = Clock::now();
    IterationLog log;
    log.iteration = it;
    const AgentPolicies policies{learn_lights ? &result.lights : nullptr,
                                 learn_vehicles ? &result.vehicles : nullptr};
    std::vector<EpisodeRecords> episodes(static_cast<std::size_t>(n_episodes));
    parallel_for(n_episodes, spec.workers, [&](int e) {
      const std::uint64_t s = episode_seed(spec.seed, it, e);
      Environment env(network, scenario, spec.env, s);
      std::mt19937_64 rng(mix_seed(s, 0xac7));
      EpisodeRecords& out = episodes[static_cast<std::size_t>(e)];
      while (!env.done()) {
        for (AgentStep& r : env.step(policies, rng)) {
          (r.type == AgentType::kTrafficLight ? out.lights : out.vehicles)
              .push_back(std::move(r));
        }
      }
    });
    log.rollout_seconds = seconds_since(t0);

    RolloutBuffer lights(spec.ppo.gamma, spec.ppo.lambda);
    RolloutBuffer vehicles(spec.ppo.gamma, spec.ppo.lambda);
    double tl_sum = 0.0, cav_sum = 0.0;
    std::vector<AgentStep> all_tl, all_cav;
    for (const EpisodeRecords& e : episodes) {
      lights.add_episode(e.lights);
      vehicles.add_episode(e.vehicles);
      all_tl.insert(all_tl.end(), e.lights.begin(), e.lights.end());
      all_cav.insert(all_cav.end(), e.vehicles.begin(), e.vehicles.end());
    }
    log.tl_mean_reward = mean_reward(all_tl, tl_sum);
    log.cav_mean_reward = mean_reward(all_cav, cav_sum);
    log.tl_episode_reward = tl_sum / n_episodes;
    log.cav_episode_reward = cav_sum / n_episodes;
    log.tl_steps = all_tl.size();
    log.cav_steps = all_cav.size();
    log.cav_segments = vehicles.segments();

    const auto t1 = Clock::now();
    auto update_lights = [&] {
      if (!learn_lights || lights.empty()) return;
      std::mt19937_64 rng(mix_seed(spec.seed, 0x11000 + it));
      log.tl_update =
          ppo_update(result.lights, adam_lights, lights.batch(), spec.ppo, rng);
    };
    auto update_vehicles = [&] {
      if (!learn_vehicles || vehicles.empty()) return;
      std::mt19937_64 rng(mix_seed(spec.seed, 0x22000 + it));
      log.cav_update = ppo_update(result.vehicles, adam_vehicles,
                                  vehicles.batch(), spec.ppo, rng);
    };
    if (spec.ppo.order == UpdateOrder::kLightsFirst) {
      update_lights();
      update_vehicles();
    } else {
      update_vehicles();
      update_lights();
    }
    log.update_seconds = seconds_since(t1);
    log.wall_seconds = seconds_since(t0);
    result.curve.push_back(log);
    if (progress) progress(log);
  }
  result.wall_seconds = seconds_since(t_start);
  return result;
}

std::vector<EpisodeReport> evaluate(const EvalSpec& spec) {
  spec.env.validate();
  spec.scenario.validate();
  auto network = std::make_shared<const RoadNetwork>(build_network(spec.scenario.grid));
  if (spec.env.lights == LightControl::kLearned) {
    if (spec.lights == nullptr) {
      throw Error(ErrorCategory::kInvalidArgument, "missing light policy");
    }
    check_shape(spec.lights, shared_tl_observation_size(*network, spec.env.mode),
                "light");
  }
  if (spec.env.vehicles == VehicleControl::kLearned) {
    if (spec.vehicles == nullptr) {
      throw Error(ErrorCategory::kInvalidArgument, "missing vehicle policy");
    }
    check_shape(spec.vehicles, cav_observation_size(spec.env.mode), "vehicle");
  }
  const AgentPolicies policies{spec.lights, spec.vehicles};
  std::vector<EpisodeReport> reports(spec.seeds.size());
  parallel_for(static_cast<int>(spec.seeds.size()), spec.workers, [&](int k) {
    const std::uint64_t s = spec.seeds[static_cast<std::size_t>(k)];
    Environment env(network, spec.scenario, spec.env, s);
    if (k == 0 && spec.trace != nullptr) env.mutable_sim().set_trace(spec.trace);
    std::mt19937_64 rng(mix_seed(s, 0xe7a1));
    while (!env.done()) env.step(policies, rng, /*greedy=*/true);
    reports[static_cast<std::size_t>(k)] = make_episode_report(env.sim(), s);
  });
  return reports;
}

void write_curve_csv(std::ostream& out, const std::vector<IterationLog>& curve) {
  out << "iteration,tl_mean_reward,cav_mean_reward,tl_episode_reward,"
         "cav_episode_reward,tl_steps,cav_steps,cav_segments,rollout_s,"
         "update_s,wall_s\n";
  out << std::setprecision(17);
  for (const IterationLog& l : curve) {
    out << l.iteration << ',' << l.tl_mean_reward << ',' << l.cav_mean_reward
        << ',' << l.tl_episode_reward << ',' << l.cav_episode_reward << ','
        << l.tl_steps << ',' << l.cav_steps << ',' << l.cav_segments << ','
        << l.rollout_seconds << ',' << l.update_seconds << ',' << l.wall_seconds
        << '\n';
  }
}

}  // namespace cotv
