#ifndef COTV_EXPERIMENT_EXPERIMENT_HPP_
#define COTV_EXPERIMENT_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cotv/env/environment.hpp"
#include "cotv/rl/ppo.hpp"
#include "cotv/rl/trainer.hpp"

namespace cotv {

enum class Method {
  kBaselineStatic,
  kActuated,
  kMaxPressure,
  kGlosa,
  kFlowCav,
  kPressLight,
  kCoTV,
  kCoTVStar,
  kICoTV,
  kMCoTV,
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();
bool is_rl(Method m);

enum class Profile { kPaper, kCi };
std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

// Training budget of a profile: paper I=150, E=18, H=720; ci I=30, E=4,
// H=360.
PpoConfig profile_ppo(Profile p);

struct ExperimentConfig {
  Method method = Method::kCoTV;
  Profile profile = Profile::kCi;
  // "1x1", "1x6" or a scenario file path.
  std::string scenario = "1x1";
  // Unset: 1.0 for the built-in grids, the file's value otherwise.
  std::optional<double> penetration;
  std::uint64_t seed = 0;
  int eval_episodes = 18;
  PpoConfig ppo = profile_ppo(Profile::kCi);
  EnvConfig env;  // controllers are overwritten by the method

  // Scenario with the method's penetration constraints applied.
  ScenarioSpec resolved_scenario() const;
  // Environment with the method's controllers and cooperation mode.
  EnvConfig resolved_env() const;
  void validate() const;
};

// Fills a config from JSON. Unknown keys are rejected. Keys: method,
// profile, scenario, penetration, seed, eval_episodes, ppo{...},
// a_star, static_green, actuated{max_green, gap_threshold,
// detection_distance}, min_green.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Fully resolved configuration, including the scenario contents.
nlohmann::json config_to_json(const ExperimentConfig& c);

// FNV-1a of the compact resolved-config dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

std::string_view code_version();

struct CheckpointInfo {
  std::string method;
  std::string agent;  // "lights" or "vehicles"
  std::string mode;
};

void save_checkpoint(const std::string& path, const ActorCritic& net,
                     const CheckpointInfo& info);
ActorCritic load_checkpoint(const std::string& path,
                            CheckpointInfo* info = nullptr);

// Manifest for a run directory: resolved config, hash, seed, version,
// evaluation policy, metric aggregation.
nlohmann::json make_manifest(const ExperimentConfig& c, std::string_view command);

}  // namespace cotv

#endif  // COTV_EXPERIMENT_EXPERIMENT_HPP_
