#include "cotv/net/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cotv/error.hpp"

namespace cotv {

namespace {

// Per-hour flow rates of the single-intersection scenario over a 300 s
// generation window.
constexpr double kGenerationWindow = 300.0;
constexpr double kRateNorthSouth = 288.0;
constexpr double kRateWestEast = 240.0;
constexpr double kRateEastWest = 192.0;
constexpr double kRateSouthNorth = 120.0;

FlowSpec periodic_flow(std::string origin, std::string destination,
                       double rate_per_hour, double start) {
  FlowSpec f;
  f.origin = std::move(origin);
  f.destination = std::move(destination);
  f.count = static_cast<int>(
      std::lround(rate_per_hour * kGenerationWindow / 3600.0));
  f.start_time = start;
  f.period = kGenerationWindow / f.count;
  return f;
}

std::string col_road(const std::string& from, const std::string& to) {
  return from + "->" + to;
}

// Flows for a 1 x cols arterial.
std::vector<FlowSpec> arterial_flows(int cols) {
  const std::string last = "I0_" + std::to_string(cols - 1);
  std::vector<FlowSpec> flows;
  flows.push_back(periodic_flow(col_road("W0", "I0_0"), col_road(last, "E0"),
                                kRateWestEast, 1.0));
  flows.push_back(periodic_flow(col_road("E0", last), col_road("I0_0", "W0"),
                                kRateEastWest, 105.0));
  for (int c = 0; c < cols; ++c) {
    const std::string x = "I0_" + std::to_string(c);
    const std::string n = "N" + std::to_string(c);
    const std::string s = "S" + std::to_string(c);
    flows.push_back(periodic_flow(col_road(n, x), col_road(x, s),
                                  kRateNorthSouth, 45.0));
    flows.push_back(periodic_flow(col_road(s, x), col_road(x, n),
                                  kRateSouthNorth, 1.0));
  }
  return flows;
}

}  // namespace

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCategory::kConfig, msg);
  };
  if (grid.rows < 1 || grid.cols < 1) fail("grid must be at least 1x1");
  if (!(grid.road_length > 0.0)) fail("road_length must be positive");
  if (!(grid.speed_limit > 0.0)) fail("speed_limit must be positive");
  if (horizon <= 0) fail("horizon must be positive");
  if (!(penetration_rate >= 0.0 && penetration_rate <= 1.0)) {
    fail("penetration must lie in [0, 1]");
  }
  for (const FlowSpec& f : flows) {
    if (f.count < 0) fail("flow count must be non-negative");
    if (!(f.period > 0.0)) fail("flow period must be positive");
    if (f.start_time < 0.0) fail("flow start must be non-negative");
    if (f.initial_speed && *f.initial_speed < 0.0) {
      fail("flow speed must be non-negative");
    }
  }
}

RoadNetwork build_network(const GridDescriptor& grid) {
  return build_grid(grid.rows, grid.cols, grid.road_length, grid.speed_limit);
}

std::vector<FlowSpec> standard_flows_1x1() {
  // Same origins and start times as the arterial with a single column, in
  // the order S->N, W->E, N->S, E->W.
  std::vector<FlowSpec> flows;
  flows.push_back(periodic_flow("S0->I0_0", "I0_0->N0", kRateSouthNorth, 1.0));
  flows.push_back(periodic_flow("W0->I0_0", "I0_0->E0", kRateWestEast, 1.0));
  flows.push_back(periodic_flow("N0->I0_0", "I0_0->S0", kRateNorthSouth, 45.0));
  flows.push_back(
      periodic_flow("E0->I0_0", "I0_0->W0", kRateEastWest, 105.0));
  return flows;
}

std::vector<FlowSpec> standard_flows_1x6() { return arterial_flows(6); }

ScenarioSpec standard_scenario_1x1() {
  ScenarioSpec s;
  s.grid = GridDescriptor{1, 1, 300.0, 15.0};
  s.flows = standard_flows_1x1();
  return s;
}

ScenarioSpec standard_scenario_1x6() {
  ScenarioSpec s;
  s.grid = GridDescriptor{1, 6, 300.0, 15.0};
  s.flows = standard_flows_1x6();
  return s;
}

int total_vehicles(const std::vector<FlowSpec>& flows) {
  return std::accumulate(flows.begin(), flows.end(), 0,
                         [](int acc, const FlowSpec& f) { return acc + f.count; });
}

InsertionSchedule assign_vehicle_kinds(const RoadNetwork& network,
                                       const std::vector<FlowSpec>& flows,
                                       double penetration_rate,
                                       std::uint64_t seed) {
  if (!(penetration_rate >= 0.0 && penetration_rate <= 1.0)) {
    throw Error(ErrorCategory::kInvalidArgument,
                "penetration rate must lie in [0, 1]");
  }
  InsertionSchedule schedule;
  std::mt19937_64 speed_rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  for (std::size_t fi = 0; fi < flows.size(); ++fi) {
    const FlowSpec& f = flows[fi];
    auto origin = network.find_road(f.origin);
    auto destination = network.find_road(f.destination);
    if (!origin || !destination) {
      throw Error(ErrorCategory::kConfig,
                  "flow references unknown road: " +
                      (origin ? f.destination : f.origin));
    }
    std::vector<RoadId> route = network.route(*origin, *destination);
    const double limit = network.road(*origin).speed_limit;
    std::uniform_real_distribution<double> speed(0.0, limit);
    for (int k = 0; k < f.count; ++k) {
      PlannedVehicle v;
      v.time = f.start_time + k * f.period;
      v.flow = fi;
      v.route = route;
      v.initial_speed =
          f.initial_speed ? std::min(*f.initial_speed, limit) : speed(speed_rng);
      schedule.push_back(std::move(v));
    }
  }
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const PlannedVehicle& a, const PlannedVehicle& b) {
                     return a.time < b.time;
                   });

  const std::size_t total = schedule.size();
  const auto n_cav = static_cast<std::size_t>(
      std::lround(penetration_rate * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 kind_rng(seed * 0xD1B54A32D192ED03ULL + 7);
  std::shuffle(order.begin(), order.end(), kind_rng);
  for (std::size_t i = 0; i < n_cav; ++i) {
    schedule[order[i]].kind = VehicleKind::kCav;
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Scenario text format.

namespace {

class ScenarioParser {
 public:
  explicit ScenarioParser(const std::string& text) : text_(text) {}

  ScenarioSpec parse() {
    ScenarioSpec spec;
    spec.flows.clear();
    bool saw_network = false;
    skip_space();
    while (pos_ < text_.size()) {
      std::string block = identifier();
      skip_space();
      expect('{');
      std::map<std::string, std::string> kv = entries();
      if (block == "network") {
        saw_network = true;
        apply_network(kv, spec);
      } else if (block == "flow") {
        spec.flows.push_back(make_flow(kv));
      } else if (block == "sim") {
        apply_sim(kv, spec);
      } else {
        fail("unknown block '" + block + "'");
      }
      skip_space();
    }
    if (!saw_network) fail("missing network block");
    spec.validate();
    return spec;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCategory::kParse,
                "scenario line " + std::to_string(line()) + ": " + msg);
  }

  int line() const {
    return 1 + static_cast<int>(std::count(
                   text_.begin(), text_.begin() + static_cast<long>(pos_), '\n'));
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  std::map<std::string, std::string> entries() {
    std::map<std::string, std::string> kv;
    while (true) {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '}') {
        ++pos_;
        return kv;
      }
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      std::string key = identifier();
      skip_space();
      expect(':');
      while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
        ++pos_;
      }
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
             text_[pos_] != '\n' && text_[pos_] != '#') {
        ++pos_;
      }
      std::string value = text_.substr(start, pos_ - start);
      while (!value.empty() &&
             std::isspace(static_cast<unsigned char>(value.back()))) {
        value.pop_back();
      }
      if (value.empty()) fail("empty value for '" + key + "'");
      if (!kv.emplace(key, value).second) fail("duplicate key '" + key + "'");
      if (pos_ >= text_.size()) fail("unterminated block");
    }
  }

  double number(const std::string& key, const std::string& value) const {
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) fail("'" + key + "' is not a number: " + value);
    return out;
  }

  int integer(const std::string& key, const std::string& value) const {
    double d = number(key, value);
    if (d != std::floor(d)) fail("'" + key + "' must be an integer");
    return static_cast<int>(d);
  }

  void check_keys(const std::map<std::string, std::string>& kv,
                  std::initializer_list<const char*> allowed) const {
    for (const auto& [k, _] : kv) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) fail("unknown key '" + k + "'");
    }
  }

  void apply_network(const std::map<std::string, std::string>& kv,
                     ScenarioSpec& spec) const {
    check_keys(kv, {"grid", "road_length", "speed_limit"});
    if (auto it = kv.find("grid"); it != kv.end()) {
      const std::string& g = it->second;
      auto x = g.find('x');
      if (x == std::string::npos) fail("grid must look like RxC");
      spec.grid.rows = integer("grid", g.substr(0, x));
      spec.grid.cols = integer("grid", g.substr(x + 1));
    } else {
      fail("network block needs 'grid'");
    }
    if (auto it = kv.find("road_length"); it != kv.end()) {
      spec.grid.road_length = number(it->first, it->second);
    }
    if (auto it = kv.find("speed_limit"); it != kv.end()) {
      spec.grid.speed_limit = number(it->first, it->second);
    }
  }

  FlowSpec make_flow(const std::map<std::string, std::string>& kv) const {
    check_keys(kv, {"origin", "destination", "count", "start", "period",
                    "speed"});
    for (const char* req : {"origin", "destination", "count", "start",
                            "period"}) {
      if (!kv.count(req)) fail(std::string("flow needs '") + req + "'");
    }
    FlowSpec f;
    f.origin = kv.at("origin");
    f.destination = kv.at("destination");
    f.count = integer("count", kv.at("count"));
    f.start_time = number("start", kv.at("start"));
    f.period = number("period", kv.at("period"));
    if (auto it = kv.find("speed"); it != kv.end() && it->second != "random") {
      f.initial_speed = number("speed", it->second);
    }
    return f;
  }

  void apply_sim(const std::map<std::string, std::string>& kv,
                 ScenarioSpec& spec) const {
    check_keys(kv, {"horizon", "penetration", "seed"});
    if (auto it = kv.find("horizon"); it != kv.end()) {
      spec.horizon = integer(it->first, it->second);
    }
    if (auto it = kv.find("penetration"); it != kv.end()) {
      spec.penetration_rate = number(it->first, it->second);
    }
    if (auto it = kv.find("seed"); it != kv.end()) {
      double s = number(it->first, it->second);
      if (s < 0 || s != std::floor(s)) fail("seed must be a non-negative integer");
      spec.seed = static_cast<std::uint64_t>(s);
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScenarioSpec parse_scenario(const std::string& text) {
  return ScenarioParser(text).parse();
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string format_scenario(const ScenarioSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "network { grid: " << spec.grid.rows << "x" << spec.grid.cols
      << ", road_length: " << spec.grid.road_length
      << ", speed_limit: " << spec.grid.speed_limit << " }\n";
  for (const FlowSpec& f : spec.flows) {
    out << "flow { origin: " << f.origin << ", destination: " << f.destination
        << ", count: " << f.count << ", start: " << f.start_time
        << ", period: " << f.period;
    if (f.initial_speed) out << ", speed: " << *f.initial_speed;
    out << " }\n";
  }
  out << "sim { horizon: " << spec.horizon
      << ", penetration: " << spec.penetration_rate << ", seed: " << spec.seed
      << " }\n";
  return out.str();
}

}  // namespace cotv
