// cotv: train, evaluate and compare signal/vehicle controllers.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotv/error.hpp"
#include "cotv/experiment/experiment.hpp"
#include "cotv/metrics/report.hpp"
#include "cotv/rl/trainer.hpp"

namespace fs = std::filesystem;
using cotv::Error;
using cotv::ErrorCategory;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config;
  std::string method;
  std::string scenario;
  std::string profile;
  std::string out = "runs/latest";
  std::optional<std::uint64_t> seed;
  std::optional<double> penetration;
  std::optional<int> episodes;
  std::string checkpoint;
  std::string trace;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--method", o.method, "Method name (overrides the config)");
  cmd->add_option("--scenario", o.scenario, "1x1, 1x6 or a scenario file");
  cmd->add_option("--profile", o.profile, "Training budget")
      ->check(CLI::IsMember({"paper", "ci"}));
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--penetration", o.penetration, "CAV share in [0, 1]");
  cmd->add_option("--episodes", o.episodes, "Evaluation episodes");
  cmd->add_option("--out", o.out, "Run directory");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCategory::kParse, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
}

// The config stored in a run manifest, minus its derived fields.
cotv::ExperimentConfig config_from_manifest(const fs::path& dir) {
  json cfg = read_json(dir / "manifest.json").at("config");
  for (const char* k : {"scenario_text", "lights", "vehicles", "cooperation"}) {
    cfg.erase(k);
  }
  return cotv::config_from_json(cfg);
}

cotv::ExperimentConfig resolve(const CommonOptions& o) {
  cotv::ExperimentConfig c;
  if (!o.config.empty()) {
    c = cotv::load_config(o.config);
  } else if (!o.checkpoint.empty() && fs::exists(fs::path(o.checkpoint) / "manifest.json")) {
    c = config_from_manifest(o.checkpoint);
  }
  if (!o.profile.empty()) {
    const cotv::Profile p = cotv::parse_profile(o.profile);
    if (p != c.profile) {
      c.profile = p;
      c.ppo = cotv::profile_ppo(p);
    }
  }
  if (!o.method.empty()) c.method = cotv::parse_method(o.method);
  if (!o.scenario.empty()) c.scenario = o.scenario;
  if (o.seed) c.seed = *o.seed;
  if (o.penetration) c.penetration = *o.penetration;
  if (o.episodes) c.eval_episodes = *o.episodes;
  c.validate();
  return c;
}

fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCategory::kIo, "cannot create " + out + ": " + ec.message());
  return fs::path(out);
}

void write_manifest(const fs::path& dir, const cotv::ExperimentConfig& c,
                    std::string_view command, const json& extra = {}) {
  json m = cotv::make_manifest(c, command);
  m["workers"] = cotv::default_workers();
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

struct Policies {
  cotv::ActorCritic lights;
  cotv::ActorCritic vehicles;
};

Policies load_policies(const cotv::ExperimentConfig& c, const std::string& dir) {
  Policies p;
  const cotv::EnvConfig env = c.resolved_env();
  auto load = [&](const char* agent, cotv::ActorCritic& net) {
    const fs::path path = fs::path(dir) / (std::string("checkpoint_") + agent + ".json");
    cotv::CheckpointInfo info;
    net = cotv::load_checkpoint(path.string(), &info);
    if (info.method != cotv::to_string(c.method)) {
      throw Error(ErrorCategory::kShapeMismatch,
                  path.string() + " was trained for " + info.method + ", not " +
                      std::string(cotv::to_string(c.method)));
    }
  };
  if (env.lights == cotv::LightControl::kLearned) load("lights", p.lights);
  if (env.vehicles == cotv::VehicleControl::kLearned) load("vehicles", p.vehicles);
  return p;
}

json reports_json(const cotv::ExperimentConfig& c, double penetration,
                  const std::vector<cotv::EpisodeReport>& episodes,
                  const cotv::EpisodeReport& aggregate) {
  json j;
  j["method"] = std::string(cotv::to_string(c.method));
  j["penetration"] = penetration;
  j["aggregate"] = json::parse(cotv::report_to_json(aggregate));
  j["episodes"] = json::array();
  for (const auto& e : episodes) j["episodes"].push_back(json::parse(cotv::report_to_json(e)));
  return j;
}

cotv::EpisodeReport run_evaluation(const cotv::ExperimentConfig& c,
                                   const Policies& p, const fs::path& dir,
                                   const std::string& trace_path,
                                   std::vector<cotv::EpisodeReport>* episodes_out) {
  cotv::EvalSpec spec;
  spec.scenario = c.resolved_scenario();
  spec.env = c.resolved_env();
  spec.lights = p.lights.empty() ? nullptr : &p.lights;
  spec.vehicles = p.vehicles.empty() ? nullptr : &p.vehicles;
  spec.seeds = cotv::evaluation_seeds(c.seed, c.eval_episodes);
  spec.workers = cotv::default_workers();
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error(ErrorCategory::kIo, "cannot write " + trace_path);
    trace << "t,id,road,pos,speed,accel\n";
    spec.trace = &trace;
  }
  std::vector<cotv::EpisodeReport> episodes = cotv::evaluate(spec);
  cotv::EpisodeReport agg = cotv::aggregate_reports(episodes);
  const std::string name(cotv::to_string(c.method));
  write_text(dir / "reports.json",
             reports_json(c, spec.scenario.penetration_rate, episodes, agg).dump(2) + "\n");
  std::map<std::string, cotv::EpisodeReport> one{{name, agg}};
  std::ostringstream csv, tt;
  cotv::write_table_csv(csv, cotv::compare_table(one, name));
  cotv::write_travel_times_csv(tt, one);
  write_text(dir / "summary.csv", csv.str());
  write_text(dir / "travel_times.csv", tt.str());
  if (episodes_out) *episodes_out = std::move(episodes);
  return agg;
}

void print_summary(const std::string& label, const cotv::EpisodeReport& r) {
  std::printf(
      "%s: travel %.2f s, delay %.2f s, fuel %.2f l/100km, co2 %.1f g/km, "
      "ttc %.2f, completed %.1f/%.1f, collided %.1f\n",
      label.c_str(), r.mean_travel_time, r.mean_delay, r.fuel_l_per_100km,
      r.co2_g_per_km, r.ttc_events, r.completed, r.inserted, r.collided);
}

int cmd_train(const CommonOptions& o) {
  cotv::ExperimentConfig c = resolve(o);
  if (!cotv::is_rl(c.method)) {
    throw Error(ErrorCategory::kInvalidArgument,
                std::string(cotv::to_string(c.method)) +
                    " has no learned agents; use `baseline`");
  }
  const fs::path dir = prepare_out(o.out);
  cotv::TrainSpec spec;
  spec.scenario = c.resolved_scenario();
  spec.env = c.resolved_env();
  spec.ppo = c.ppo;
  spec.seed = c.seed;
  spec.workers = cotv::default_workers();
  cotv::TrainResult r = cotv::train(spec, [](const cotv::IterationLog& l) {
    std::fprintf(stderr, "iter %3d  tl %.4f  cav %.4f  steps %zu/%zu  %.1fs\n",
                 l.iteration, l.tl_mean_reward, l.cav_mean_reward, l.tl_steps,
                 l.cav_steps, l.wall_seconds);
  });
  const std::string method(cotv::to_string(c.method));
  const std::string mode(cotv::to_string(spec.env.mode));
  if (!r.lights.empty()) {
    cotv::save_checkpoint((dir / "checkpoint_lights.json").string(), r.lights,
                          {method, "lights", mode});
  }
  if (!r.vehicles.empty()) {
    cotv::save_checkpoint((dir / "checkpoint_vehicles.json").string(), r.vehicles,
                          {method, "vehicles", mode});
  }
  std::ostringstream curve;
  cotv::write_curve_csv(curve, r.curve);
  write_text(dir / "rewards.csv", curve.str());
  write_manifest(dir, c, "train", {{"train_wall_seconds", r.wall_seconds}});
  std::printf("trained %s in %.1f s -> %s\n", method.c_str(), r.wall_seconds,
              dir.string().c_str());
  return 0;
}

int cmd_evaluate(CommonOptions o) {
  if (o.checkpoint.empty()) o.checkpoint = o.out;
  cotv::ExperimentConfig c = resolve(o);
  if (!cotv::is_rl(c.method)) {
    throw Error(ErrorCategory::kInvalidArgument,
                std::string(cotv::to_string(c.method)) + " is not learned; use `baseline`");
  }
  const Policies p = load_policies(c, o.checkpoint);
  const fs::path dir = prepare_out(o.out);
  const cotv::EpisodeReport agg = run_evaluation(c, p, dir, o.trace, nullptr);
  write_manifest(dir, c, "evaluate", {{"checkpoint", o.checkpoint}});
  print_summary(std::string(cotv::to_string(c.method)), agg);
  return 0;
}

int cmd_baseline(const CommonOptions& o) {
  cotv::ExperimentConfig c = resolve(o);
  if (cotv::is_rl(c.method)) {
    throw Error(ErrorCategory::kInvalidArgument,
                std::string(cotv::to_string(c.method)) + " needs `train` first");
  }
  const fs::path dir = prepare_out(o.out);
  const cotv::EpisodeReport agg = run_evaluation(c, {}, dir, o.trace, nullptr);
  write_manifest(dir, c, "baseline");
  print_summary(std::string(cotv::to_string(c.method)), agg);
  return 0;
}

int cmd_sweep(CommonOptions o, const std::vector<double>& rates) {
  cotv::ExperimentConfig c = resolve(o);
  if (cotv::is_rl(c.method) && o.checkpoint.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "sweep of a learned method needs --checkpoint");
  }
  const Policies p = cotv::is_rl(c.method) ? load_policies(c, o.checkpoint) : Policies{};
  const fs::path dir = prepare_out(o.out);
  std::ostringstream csv;
  csv << "penetration,travel_time,delay,fuel,co2,ttc_events,completed,collided\n";
  csv.precision(17);
  for (double rate : rates) {
    cotv::ExperimentConfig rc = c;
    rc.penetration = rate;
    rc.validate();
    char name[32];
    std::snprintf(name, sizeof name, "rate_%.2f", rate);
    const fs::path sub = prepare_out((dir / name).string());
    const cotv::EpisodeReport r = run_evaluation(rc, p, sub, "", nullptr);
    csv << rate << ',' << r.mean_travel_time << ',' << r.mean_delay << ','
        << r.fuel_l_per_100km << ',' << r.co2_g_per_km << ',' << r.ttc_events
        << ',' << r.completed << ',' << r.collided << '\n';
    print_summary(name, r);
  }
  write_text(dir / "sweep.csv", csv.str());
  write_manifest(dir, c, "sweep", {{"rates", rates}, {"checkpoint", o.checkpoint}});
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& baseline,
               const std::string& out) {
  std::map<std::string, cotv::EpisodeReport> reports;
  for (const std::string& run : runs) {
    const json j = read_json(fs::path(run) / "reports.json");
    std::string name = j.at("method").get<std::string>();
    if (reports.count(name)) name = fs::path(run).filename().string();
    reports[name] = cotv::report_from_json(j.at("aggregate").dump());
  }
  const auto rows = cotv::compare_table(reports, baseline);
  const fs::path dir = prepare_out(out);
  std::ostringstream csv, tt;
  cotv::write_table_csv(csv, rows);
  cotv::write_travel_times_csv(tt, reports);
  write_text(dir / "comparison.csv", csv.str());
  write_text(dir / "travel_times.csv", tt.str());
  cotv::write_table_text(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative signal and vehicle control experiments"};
  app.require_subcommand(1);

  CommonOptions train_o, eval_o, base_o, sweep_o;
  auto* train = app.add_subcommand("train", "Train learned agents");
  add_common(train, train_o);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained run greedily");
  add_common(evaluate, eval_o);
  evaluate->add_option("--checkpoint", eval_o.checkpoint, "Run directory with checkpoints");
  evaluate->add_option("--trace", eval_o.trace, "Trajectory CSV of the first episode");

  auto* baseline = app.add_subcommand("baseline", "Evaluate a non-learned controller");
  add_common(baseline, base_o);
  baseline->add_option("--trace", base_o.trace, "Trajectory CSV of the first episode");

  std::vector<double> rates{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  auto* sweep = app.add_subcommand("sweep", "Evaluate across CAV penetration rates");
  add_common(sweep, sweep_o);
  sweep->add_option("--checkpoint", sweep_o.checkpoint, "Run directory with checkpoints");
  sweep->add_option("--rates", rates, "Penetration rates")->delimiter(',');

  std::vector<std::string> runs;
  std::string report_baseline = "baseline-static", report_out = "runs/report";
  auto* report = app.add_subcommand("report", "Compare evaluated runs");
  report->add_option("--runs", runs, "Run directories with reports.json")->required();
  report->add_option("--baseline", report_baseline, "Reference method");
  report->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "error[invalid-argument]: %s\n", e.what());
    return static_cast<int>(ErrorCategory::kInvalidArgument);
  }

  try {
    if (*train) return cmd_train(train_o);
    if (*evaluate) return cmd_evaluate(eval_o);
    if (*baseline) return cmd_baseline(base_o);
    if (*sweep) return cmd_sweep(sweep_o, rates);
    if (*report) return cmd_report(runs, report_baseline, report_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n",
                 std::string(cotv::to_string(e.category())).c_str(), e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
