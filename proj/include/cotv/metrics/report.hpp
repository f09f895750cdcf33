#ifndef COTV_METRICS_REPORT_HPP_
#define COTV_METRICS_REPORT_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "cotv/net/network.hpp"
#include "cotv/sim/simulation.hpp"

namespace cotv {

struct TravelTimeStats {
  double mean = 0.0;
  std::vector<double> per_vehicle;  // s, in trip order
};

// Throws on an empty trip set.
TravelTimeStats travel_time_stats(const std::vector<TripRecord>& trips);

// Free-flow time over a route at each road's speed limit.
double ideal_travel_time(const RoadNetwork& network,
                         const std::vector<RoadId>& route);

// Mean of (actual - ideal) over trips; 0 for an empty set.
double delay_stats(const std::vector<TripRecord>& trips);

// Fleet-aggregate ratios. Both throw when the summed distance is zero.
double fuel_per_100km(const std::vector<TripRecord>& trips);
double co2_per_km(const std::vector<TripRecord>& trips);

inline constexpr const char* kEfficiencyAggregation =
    "fleet aggregate: sum(fuel) / sum(distance) over completed trips";

struct EpisodeReport {
  std::uint64_t seed = 0;
  double mean_travel_time = 0.0;  // s
  double mean_delay = 0.0;        // s
  double fuel_l_per_100km = 0.0;
  double co2_g_per_km = 0.0;
  double ttc_events = 0.0;  // fractional once averaged
  double completed = 0.0;
  double inserted = 0.0;
  double collided = 0.0;
  std::vector<double> travel_times;  // per completed vehicle
};

// Completed trips only; collided vehicles never produce a trip record.
// Means are NaN when nothing completed.
EpisodeReport make_episode_report(const Simulation& sim, std::uint64_t seed);

// Metric-wise mean over episodes (NaN entries skipped); travel time
// distributions are concatenated. Throws on an empty set.
EpisodeReport aggregate_reports(const std::vector<EpisodeReport>& episodes);

struct MetricRow {
  std::string method;
  std::string metric;
  std::string unit;
  double value = 0.0;
  double change_pct = 0.0;  // relative to the baseline method
};

double percent_change(double baseline, double value);

// One row per method x metric, methods in map order, baseline included.
std::vector<MetricRow> compare_table(
    const std::map<std::string, EpisodeReport>& reports,
    const std::string& baseline);

std::string report_to_json(const EpisodeReport& r, int indent = 2);
EpisodeReport report_from_json(const std::string& text);

void write_table_csv(std::ostream& out, const std::vector<MetricRow>& rows);
void write_travel_times_csv(std::ostream& out,
                            const std::map<std::string, EpisodeReport>& reports);
// Human-readable table for terminals.
void write_table_text(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace cotv

#endif  // COTV_METRICS_REPORT_HPP_
