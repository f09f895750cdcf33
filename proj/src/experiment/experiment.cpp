#include "cotv/experiment/experiment.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cotv/error.hpp"

#ifndef COTV_VERSION
#define COTV_VERSION "0.0.0"
#endif

namespace cotv {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr std::array<MethodName, 10> kMethodNames = {{
    {Method::kBaselineStatic, "baseline-static"},
    {Method::kActuated, "actuated"},
    {Method::kMaxPressure, "max-pressure"},
    {Method::kGlosa, "glosa"},
    {Method::kFlowCav, "flowcav"},
    {Method::kPressLight, "presslight"},
    {Method::kCoTV, "cotv"},
    {Method::kCoTVStar, "cotv-star"},
    {Method::kICoTV, "i-cotv"},
    {Method::kMCoTV, "m-cotv"},
}};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) {
    throw Error(ErrorCategory::kConfig, where + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCategory::kConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCategory::kConfig, std::string("bad value for '") + key + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json ppo_to_json(const PpoConfig& p) {
  return {{"iterations", p.iterations},
          {"episodes", p.episodes},
          {"horizon", p.horizon},
          {"epochs", p.epochs},
          {"minibatch", p.minibatch},
          {"clip", p.clip},
          {"gamma", p.gamma},
          {"lambda", p.lambda},
          {"learning_rate", p.learning_rate},
          {"value_coef", p.value_coef},
          {"entropy_coef", p.entropy_coef},
          {"max_grad_norm", p.max_grad_norm},
          {"hidden", p.hidden},
          {"update_order", p.order == UpdateOrder::kLightsFirst ? "lights-first"
                                                                : "vehicles-first"}};
}

void ppo_from_json(const nlohmann::json& j, PpoConfig& p) {
  reject_unknown(j,
                 {"iterations", "episodes", "horizon", "epochs", "minibatch",
                  "clip", "gamma", "lambda", "learning_rate", "value_coef",
                  "entropy_coef", "max_grad_norm", "hidden", "update_order"},
                 "ppo");
  read(j, "iterations", p.iterations);
  read(j, "episodes", p.episodes);
  read(j, "horizon", p.horizon);
  read(j, "epochs", p.epochs);
  read(j, "minibatch", p.minibatch);
  read(j, "clip", p.clip);
  read(j, "gamma", p.gamma);
  read(j, "lambda", p.lambda);
  read(j, "learning_rate", p.learning_rate);
  read(j, "value_coef", p.value_coef);
  read(j, "entropy_coef", p.entropy_coef);
  read(j, "max_grad_norm", p.max_grad_norm);
  read(j, "hidden", p.hidden);
  std::string order;
  read(j, "update_order", order);
  if (order == "vehicles-first") {
    p.order = UpdateOrder::kVehiclesFirst;
  } else if (order == "lights-first") {
    p.order = UpdateOrder::kLightsFirst;
  } else if (!order.empty()) {
    throw Error(ErrorCategory::kConfig, "update_order: lights-first|vehicles-first");
  }
}

}  // namespace

std::string_view to_string(Method m) {
  for (const MethodName& n : kMethodNames) {
    if (n.method == m) return n.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const MethodName& n : kMethodNames) {
    if (name == n.name) return n.method;
  }
  throw Error(ErrorCategory::kConfig, "unknown method '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const MethodName& n : kMethodNames) v.push_back(n.method);
    return v;
  }();
  return methods;
}

bool is_rl(Method m) {
  switch (m) {
    case Method::kBaselineStatic:
    case Method::kActuated:
    case Method::kMaxPressure:
    case Method::kGlosa:
      return false;
    default:
      return true;
  }
}

std::string_view to_string(Profile p) {
  return p == Profile::kPaper ? "paper" : "ci";
}

Profile parse_profile(std::string_view name) {
  if (name == "paper") return Profile::kPaper;
  if (name == "ci") return Profile::kCi;
  throw Error(ErrorCategory::kConfig, "profile must be paper or ci");
}

PpoConfig profile_ppo(Profile p) {
  PpoConfig c;
  if (p == Profile::kCi) {
    c.iterations = 30;
    c.episodes = 4;
    c.horizon = 360;
  }
  return c;
}

ScenarioSpec ExperimentConfig::resolved_scenario() const {
  ScenarioSpec s;
  if (scenario == "1x1" || scenario == "1x6") {
    s = scenario == "1x1" ? standard_scenario_1x1() : standard_scenario_1x6();
    s.penetration_rate = 1.0;
  } else {
    s = load_scenario(scenario);
  }
  if (penetration) s.penetration_rate = *penetration;
  if (method == Method::kGlosa) s.penetration_rate = 1.0;
  if (method == Method::kPressLight) s.penetration_rate = 0.0;
  s.seed = seed;
  return s;
}

EnvConfig ExperimentConfig::resolved_env() const {
  EnvConfig e = env;
  e.vehicles = VehicleControl::kNone;
  e.mode = CooperationMode::kCoTV;
  switch (method) {
    case Method::kBaselineStatic:
      e.lights = LightControl::kStatic;
      break;
    case Method::kActuated:
      e.lights = LightControl::kActuated;
      break;
    case Method::kMaxPressure:
      e.lights = LightControl::kMaxPressure;
      break;
    case Method::kGlosa:
      e.lights = LightControl::kStatic;
      e.vehicles = VehicleControl::kGlosa;
      break;
    case Method::kFlowCav:
      // One learned CAV per incoming road under a fixed plan, no signal input.
      e.lights = LightControl::kStatic;
      e.vehicles = VehicleControl::kLearned;
      e.mode = CooperationMode::kICoTV;
      break;
    case Method::kPressLight:
      // Learned lights seeing only pressure counts.
      e.lights = LightControl::kLearned;
      e.mode = CooperationMode::kICoTV;
      break;
    case Method::kCoTV:
    case Method::kCoTVStar:
    case Method::kICoTV:
    case Method::kMCoTV:
      e.lights = LightControl::kLearned;
      e.vehicles = VehicleControl::kLearned;
      e.mode = method == Method::kCoTV       ? CooperationMode::kCoTV
               : method == Method::kCoTVStar ? CooperationMode::kCoTVStar
               : method == Method::kICoTV    ? CooperationMode::kICoTV
                                             : CooperationMode::kMCoTV;
      break;
  }
  return e;
}

void ExperimentConfig::validate() const {
  if (penetration && !(*penetration >= 0.0 && *penetration <= 1.0)) {
    throw Error(ErrorCategory::kConfig, "penetration must be in [0, 1]");
  }
  if (penetration && method == Method::kGlosa && *penetration != 1.0) {
    throw Error(ErrorCategory::kConfig, "glosa runs with every vehicle a CAV");
  }
  if (penetration && method == Method::kPressLight && *penetration != 0.0) {
    throw Error(ErrorCategory::kConfig, "presslight runs without CAVs");
  }
  if (eval_episodes < 1) {
    throw Error(ErrorCategory::kConfig, "eval_episodes must be >= 1");
  }
  ppo.validate();
  resolved_env().validate();
  resolved_scenario().validate();
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"method", "profile", "scenario", "penetration", "seed",
                  "eval_episodes", "ppo", "a_star", "static_green", "min_green",
                  "actuated"},
                 "config");
  ExperimentConfig c;
  std::string method, profile;
  read(j, "method", method);
  read(j, "profile", profile);
  if (!method.empty()) c.method = parse_method(method);
  if (!profile.empty()) c.profile = parse_profile(profile);
  c.ppo = profile_ppo(c.profile);
  read(j, "scenario", c.scenario);
  if (j.contains("penetration")) {
    double p = 0.0;
    read(j, "penetration", p);
    c.penetration = p;
  }
  read(j, "seed", c.seed);
  read(j, "eval_episodes", c.eval_episodes);
  if (j.contains("ppo")) ppo_from_json(j.at("ppo"), c.ppo);
  read(j, "a_star", c.env.a_star);
  read(j, "static_green", c.env.static_plan.green);
  read(j, "min_green", c.env.sim.min_green);
  if (j.contains("actuated")) {
    const auto& a = j.at("actuated");
    reject_unknown(a, {"max_green", "gap_threshold", "detection_distance"},
                   "actuated");
    read(a, "max_green", c.env.actuated.max_green);
    read(a, "gap_threshold", c.env.actuated.gap_threshold);
    read(a, "detection_distance", c.env.actuated.detection_distance);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path), nullptr, true, /*comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCategory::kParse, path + ": " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  const EnvConfig e = c.resolved_env();
  const ScenarioSpec s = c.resolved_scenario();
  nlohmann::json j;
  j["method"] = std::string(to_string(c.method));
  j["profile"] = std::string(to_string(c.profile));
  j["scenario"] = c.scenario;
  j["scenario_text"] = format_scenario(s);
  j["penetration"] = s.penetration_rate;
  j["seed"] = c.seed;
  j["eval_episodes"] = c.eval_episodes;
  j["ppo"] = ppo_to_json(c.ppo);
  j["a_star"] = e.a_star;
  j["static_green"] = e.static_plan.green;
  j["min_green"] = e.sim.min_green;
  j["actuated"] = {{"max_green", e.actuated.max_green},
                   {"gap_threshold", e.actuated.gap_threshold},
                   {"detection_distance", e.actuated.detection_distance}};
  j["lights"] = std::string(to_string(e.lights));
  j["vehicles"] = std::string(to_string(e.vehicles));
  j["cooperation"] = std::string(to_string(e.mode));
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
  return buf;
}

std::string_view code_version() { return COTV_VERSION; }

void save_checkpoint(const std::string& path, const ActorCritic& net,
                     const CheckpointInfo& info) {
  nlohmann::json j;
  j["format"] = "cotv-checkpoint";
  j["format_version"] = 1;
  j["method"] = info.method;
  j["agent"] = info.agent;
  j["mode"] = info.mode;
  j["obs_dim"] = net.obs_dim();
  j["hidden"] = net.hidden();
  j["head"] = std::string(to_string(net.head()));
  j["fingerprint"] = net.fingerprint();
  j["params"] = std::vector<double>(net.params().data(),
                                    net.params().data() + net.params().size());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path);
  out << j.dump();
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path);
}

ActorCritic load_checkpoint(const std::string& path, CheckpointInfo* info) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCategory::kParse, path + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "cotv-checkpoint") {
      throw Error(ErrorCategory::kParse, path + ": not a checkpoint");
    }
    const std::string head = j.at("head").get<std::string>();
    ActionHead h;
    if (head == to_string(ActionHead::kBernoulli)) {
      h = ActionHead::kBernoulli;
    } else if (head == to_string(ActionHead::kGaussian)) {
      h = ActionHead::kGaussian;
    } else {
      throw Error(ErrorCategory::kParse, path + ": unknown head " + head);
    }
    ActorCritic net(j.at("obs_dim").get<int>(), h, 0, j.at("hidden").get<int>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.num_params()) {
      throw Error(ErrorCategory::kShapeMismatch,
                  path + ": parameter count does not match the architecture");
    }
    net.params() = Eigen::Map<const Eigen::VectorXd>(
        params.data(), static_cast<Eigen::Index>(params.size()));
    if (net.fingerprint() != j.at("fingerprint").get<std::uint64_t>()) {
      throw Error(ErrorCategory::kParse, path + ": fingerprint mismatch");
    }
    if (info != nullptr) {
      info->method = j.at("method").get<std::string>();
      info->agent = j.at("agent").get<std::string>();
      info->mode = j.at("mode").get<std::string>();
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kParse, path + ": " + e.what());
  }
}

nlohmann::json make_manifest(const ExperimentConfig& c, std::string_view command) {
  nlohmann::json m;
  m["tool"] = "cotv";
  m["version"] = std::string(code_version());
  m["command"] = std::string(command);
  m["config"] = config_to_json(c);
  m["config_hash"] = config_hash(c);
  m["seed"] = c.seed;
  m["evaluation_policy"] = "greedy: Bernoulli mode, Gaussian mean";
  m["efficiency_aggregation"] = kEfficiencyAggregation;
  m["note"] = "results do not depend on the worker count";
  return m;
}

}  // namespace cotv
