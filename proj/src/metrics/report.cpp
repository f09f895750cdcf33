#include "cotv/metrics/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include <json.hpp>

#include "cotv/error.hpp"

namespace cotv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MetricDef {
  const char* name;
  const char* unit;
  double EpisodeReport::*field;
};

constexpr MetricDef kMetrics[] = {
    {"travel_time", "s", &EpisodeReport::mean_travel_time},
    {"delay", "s", &EpisodeReport::mean_delay},
    {"fuel", "l/100km", &EpisodeReport::fuel_l_per_100km},
    {"co2", "g/km", &EpisodeReport::co2_g_per_km},
    {"ttc_events", "count", &EpisodeReport::ttc_events},
    {"completed", "count", &EpisodeReport::completed},
    {"inserted", "count", &EpisodeReport::inserted},
    {"collided", "count", &EpisodeReport::collided},
};

double total_distance(const std::vector<TripRecord>& trips) {
  double d = 0.0;
  for (const TripRecord& t : trips) d += t.distance;
  if (!(d > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "total trip distance is zero");
  }
  return d;
}

// JSON has no NaN; missing means are stored as null.
nlohmann::json num(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}
double num(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

TravelTimeStats travel_time_stats(const std::vector<TripRecord>& trips) {
  if (trips.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "no completed trips");
  }
  TravelTimeStats s;
  s.per_vehicle.reserve(trips.size());
  double sum = 0.0;
  for (const TripRecord& t : trips) {
    s.per_vehicle.push_back(t.travel_time());
    sum += t.travel_time();
  }
  s.mean = sum / static_cast<double>(trips.size());
  return s;
}

double ideal_travel_time(const RoadNetwork& network,
                         const std::vector<RoadId>& route) {
  double t = 0.0;
  for (RoadId r : route) {
    const Road& road = network.road(r);
    t += road.length / road.speed_limit;
  }
  return t;
}

double delay_stats(const std::vector<TripRecord>& trips) {
  if (trips.empty()) return 0.0;
  double sum = 0.0;
  for (const TripRecord& t : trips) sum += t.travel_time() - t.ideal_time;
  return sum / static_cast<double>(trips.size());
}

double fuel_per_100km(const std::vector<TripRecord>& trips) {
  const double d = total_distance(trips);
  double fuel = 0.0;
  for (const TripRecord& t : trips) fuel += t.fuel;
  return 100000.0 * fuel / d;
}

double co2_per_km(const std::vector<TripRecord>& trips) {
  const double d = total_distance(trips);
  double g = 0.0;
  for (const TripRecord& t : trips) g += t.co2;
  return 1000.0 * g / d;
}

EpisodeReport make_episode_report(const Simulation& sim, std::uint64_t seed) {
  EpisodeReport r;
  r.seed = seed;
  const auto& trips = sim.trips();
  r.completed = static_cast<double>(trips.size());
  r.inserted = static_cast<double>(sim.inserted());
  r.collided = static_cast<double>(sim.collision_removed());
  r.ttc_events = static_cast<double>(sim.ttc_events_total());
  if (trips.empty()) {
    r.mean_travel_time = r.mean_delay = r.fuel_l_per_100km = r.co2_g_per_km = kNaN;
    return r;
  }
  TravelTimeStats tt = travel_time_stats(trips);
  r.mean_travel_time = tt.mean;
  r.travel_times = std::move(tt.per_vehicle);
  r.mean_delay = delay_stats(trips);
  r.fuel_l_per_100km = fuel_per_100km(trips);
  r.co2_g_per_km = co2_per_km(trips);
  return r;
}

EpisodeReport aggregate_reports(const std::vector<EpisodeReport>& episodes) {
  if (episodes.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "no episodes to aggregate");
  }
  EpisodeReport out;
  out.seed = episodes.front().seed;
  for (const MetricDef& m : kMetrics) {
    double sum = 0.0;
    int n = 0;
    for (const EpisodeReport& e : episodes) {
      if (std::isfinite(e.*m.field)) {
        sum += e.*m.field;
        ++n;
      }
    }
    out.*m.field = n > 0 ? sum / n : kNaN;
  }
  for (const EpisodeReport& e : episodes) {
    out.travel_times.insert(out.travel_times.end(), e.travel_times.begin(),
                            e.travel_times.end());
  }
  return out;
}

double percent_change(double baseline, double value) {
  if (baseline == 0.0) return value == 0.0 ? 0.0 : kNaN;
  return 100.0 * (value - baseline) / baseline;
}

std::vector<MetricRow> compare_table(
    const std::map<std::string, EpisodeReport>& reports,
    const std::string& baseline) {
  auto base = reports.find(baseline);
  if (base == reports.end()) {
    throw Error(ErrorCategory::kInvalidArgument,
                "baseline '" + baseline + "' missing from comparison");
  }
  std::vector<MetricRow> rows;
  for (const auto& [method, report] : reports) {
    for (const MetricDef& m : kMetrics) {
      MetricRow row;
      row.method = method;
      row.metric = m.name;
      row.unit = m.unit;
      row.value = report.*m.field;
      row.change_pct = percent_change(base->second.*m.field, row.value);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string report_to_json(const EpisodeReport& r, int indent) {
  nlohmann::json j;
  j["aggregation"] = kEfficiencyAggregation;
  j["seed"] = r.seed;
  j["units"] = {{"travel_time", "s"},     {"delay", "s"},
                {"fuel", "l/100km"},      {"co2", "g/km"},
                {"ttc_events", "count"}};
  for (const MetricDef& m : kMetrics) j[m.name] = num(r.*m.field);
  j["travel_times"] = r.travel_times;
  return j.dump(indent);
}

EpisodeReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kParse, std::string("report: ") + e.what());
  }
  EpisodeReport r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const MetricDef& m : kMetrics) r.*m.field = num(j.at(m.name));
    r.travel_times = j.at("travel_times").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kParse, std::string("report: ") + e.what());
  }
  return r;
}

void write_table_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "method,metric,unit,value,change_pct\n";
  out << std::setprecision(17);
  for (const MetricRow& r : rows) {
    out << r.method << ',' << r.metric << ',' << r.unit << ',' << r.value << ','
        << r.change_pct << '\n';
  }
}

void write_travel_times_csv(std::ostream& out,
                            const std::map<std::string, EpisodeReport>& reports) {
  out << "method,index,travel_time_s\n";
  out << std::setprecision(17);
  for (const auto& [method, report] : reports) {
    for (std::size_t i = 0; i < report.travel_times.size(); ++i) {
      out << method << ',' << i << ',' << report.travel_times[i] << '\n';
    }
  }
}

void write_table_text(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << std::left << std::setw(17) << "method" << std::setw(12) << "metric"
      << std::right << std::setw(12) << "value" << std::setw(11) << "change"
      << "  unit\n";
  out << std::fixed;
  for (const MetricRow& r : rows) {
    out << std::left << std::setw(17) << r.method << std::setw(12) << r.metric
        << std::right << std::setw(12) << std::setprecision(2) << r.value
        << std::setw(10) << std::setprecision(2) << r.change_pct << "%  "
        << r.unit << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace cotv
