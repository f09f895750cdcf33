#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cotv/error.hpp"
#include "cotv/experiment/experiment.hpp"

using namespace cotv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cotv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" COTV_CLI_PATH "' " + args +
                          " >cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK(all_methods().size() == 10);
  CHECK_FALSE(is_rl(Method::kBaselineStatic));
  CHECK_FALSE(is_rl(Method::kGlosa));
  CHECK(is_rl(Method::kPressLight));
  CHECK(is_rl(Method::kMCoTV));
  CHECK_THROWS_AS(parse_method("nope"), Error);
}

TEST_CASE("profile budgets") {
  const PpoConfig paper = profile_ppo(Profile::kPaper);
  CHECK(paper.iterations == 150);
  CHECK(paper.episodes == 18);
  CHECK(paper.horizon == 720);
  const PpoConfig ci = profile_ppo(Profile::kCi);
  CHECK(ci.iterations == 30);
  CHECK(ci.episodes == 4);
  CHECK(ci.horizon == 360);
}

TEST_CASE("methods map to controllers and penetration") {
  ExperimentConfig c;
  c.method = Method::kPressLight;
  CHECK(c.resolved_env().lights == LightControl::kLearned);
  CHECK(c.resolved_env().vehicles == VehicleControl::kNone);
  CHECK(c.resolved_scenario().penetration_rate == 0.0);

  c.method = Method::kGlosa;
  CHECK(c.resolved_env().lights == LightControl::kStatic);
  CHECK(c.resolved_env().vehicles == VehicleControl::kGlosa);
  CHECK(c.resolved_scenario().penetration_rate == 1.0);

  c.method = Method::kFlowCav;
  CHECK(c.resolved_env().lights == LightControl::kStatic);
  CHECK(c.resolved_env().vehicles == VehicleControl::kLearned);

  c.method = Method::kCoTVStar;
  CHECK(c.resolved_env().mode == CooperationMode::kCoTVStar);
  c.penetration = 0.4;
  CHECK(c.resolved_scenario().penetration_rate == 0.4);
  c.scenario = "1x6";
  CHECK(c.resolved_scenario().grid.cols == 6);

  c.method = Method::kPressLight;
  CHECK_THROWS_AS(c.validate(), Error);
  c.penetration = 1.7;
  c.method = Method::kCoTV;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("config JSON parsing") {
  const auto j = nlohmann::json::parse(R"({
    "method": "i-cotv", "profile": "paper", "seed": 11, "penetration": 0.5,
    "ppo": {"iterations": 3, "update_order": "vehicles-first"},
    "actuated": {"max_green": 30}
  })");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.method == Method::kICoTV);
  CHECK(c.profile == Profile::kPaper);
  CHECK(c.seed == 11);
  CHECK(c.ppo.iterations == 3);
  CHECK(c.ppo.episodes == 18);
  CHECK(c.ppo.order == UpdateOrder::kVehiclesFirst);
  CHECK(c.env.actuated.max_green == 30.0);
  CHECK(*c.penetration == 0.5);

  for (const char* bad : {R"({"colour": 1})", R"({"ppo": {"epoch": 2}})",
                          R"({"actuated": {"gap": 1}})"}) {
    try {
      config_from_json(nlohmann::json::parse(bad));
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kConfig);
    }
  }
}

TEST_CASE("resolved config round-trips and hashes stably") {
  ExperimentConfig c;
  c.method = Method::kMCoTV;
  c.seed = 5;
  nlohmann::json j = config_to_json(c);
  CHECK(j["cooperation"] == "m-cotv");
  CHECK(j["scenario_text"].get<std::string>().find("flow") != std::string::npos);
  for (const char* derived : {"scenario_text", "lights", "vehicles", "cooperation"}) {
    j.erase(derived);
  }
  const ExperimentConfig back = config_from_json(j);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.seed = 6;
  CHECK(config_hash(back) != config_hash(c));
}

TEST_CASE("checkpoints restore parameters bit for bit") {
  const fs::path dir = scratch("ckpt");
  const ActorCritic net(7, ActionHead::kGaussian, 3, 16);
  save_checkpoint((dir / "c.json").string(), net, {"cotv", "vehicles", "cotv"});
  CheckpointInfo info;
  const ActorCritic back = load_checkpoint((dir / "c.json").string(), &info);
  CHECK(back.fingerprint() == net.fingerprint());
  CHECK(back.head() == ActionHead::kGaussian);
  CHECK(back.hidden() == 16);
  CHECK(info.agent == "vehicles");
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    CHECK(back.params()(i) == net.params()(i));
  }

  nlohmann::json j = read_json(dir / "c.json");
  j["params"][0] = j["params"][0].get<double>() + 1.0;
  std::ofstream(dir / "tampered.json") << j.dump();
  try {
    load_checkpoint((dir / "tampered.json").string());
    FAIL("tampered checkpoint loaded");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kParse);
  }
  j = read_json(dir / "c.json");
  j["obs_dim"] = 8;
  std::ofstream(dir / "shape.json") << j.dump();
  try {
    load_checkpoint((dir / "shape.json").string());
    FAIL("mis-shaped checkpoint loaded");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kShapeMismatch);
  }
}

TEST_CASE("manifest records what is needed to reproduce a run") {
  ExperimentConfig c;
  c.seed = 9;
  const nlohmann::json m = make_manifest(c, "train");
  CHECK(m["command"] == "train");
  CHECK(m["seed"] == 9);
  CHECK(m["config_hash"] == config_hash(c));
  CHECK(m["version"] == std::string(code_version()));
  CHECK(m.contains("config"));
  CHECK(m.contains("evaluation_policy"));
  CHECK(m.contains("efficiency_aggregation"));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli_codes");
  std::ofstream(dir / "bad.json") << R"({"method": "cotv", "colour": 1})";
  CHECK(run_cli("baseline --bogus", dir) == 2);
  CHECK(run_cli("train --config bad.json", dir) == 3);
  CHECK(run_cli("baseline --method cotv", dir) == 2);
  CHECK(run_cli("train --method actuated", dir) == 2);
  CHECK(run_cli("baseline --method glosa --penetration 0.5", dir) == 3);
  CHECK(run_cli("evaluate --method cotv --checkpoint missing", dir) == 8);
  CHECK(run_cli("train --config missing.json", dir) == 8);
  CHECK(run_cli("--help", dir) == 0);
}

TEST_CASE("command line train, evaluate, baseline and report") {
  const fs::path dir = scratch("cli_flow");
  std::ofstream(dir / "tiny.json") << R"({
    // short budget
    "method": "presslight", "seed": 3, "eval_episodes": 1,
    "ppo": {"iterations": 1, "episodes": 1, "horizon": 40, "epochs": 1, "minibatch": 32}
  })";
  REQUIRE(run_cli("train --config tiny.json --out runs/pl", dir) == 0);
  CHECK(fs::exists(dir / "runs/pl/checkpoint_lights.json"));
  CHECK_FALSE(fs::exists(dir / "runs/pl/checkpoint_vehicles.json"));
  CHECK(fs::exists(dir / "runs/pl/rewards.csv"));
  const nlohmann::json m = read_json(dir / "runs/pl/manifest.json");
  CHECK(m["config"]["method"] == "presslight");

  REQUIRE(run_cli("evaluate --checkpoint runs/pl --out runs/pl_eval", dir) == 0);
  const nlohmann::json r = read_json(dir / "runs/pl_eval/reports.json");
  CHECK(r["method"] == "presslight");
  CHECK(r["episodes"].size() == 1);

  REQUIRE(run_cli("baseline --method baseline-static --episodes 1 --out runs/static", dir) == 0);
  REQUIRE(run_cli("report --runs runs/static runs/pl_eval --out runs/cmp", dir) == 0);
  std::ifstream cmp(dir / "runs/cmp/comparison.csv");
  std::stringstream ss;
  ss << cmp.rdbuf();
  CHECK(ss.str().find("presslight,travel_time") != std::string::npos);
  CHECK(run_cli("report --runs runs/pl_eval --out runs/cmp2", dir) == 2);
}
