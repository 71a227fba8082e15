#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtrs/demand.hpp"
#include "rtrs/types.hpp"

namespace rtrs {

inline constexpr int kReportSchemaVersion = 1;

struct RequestOutcome {
    Request request;
    ZoneId origin_zone = 0;
    ZoneId destination_zone = 0;
    Seconds max_ride = 0;
    VehicleId vehicle = -1;
    Seconds pickup = -1;   // -1 while never picked up
    Seconds dropoff = -1;

    bool completed() const noexcept { return dropoff >= 0; }
    Seconds wait() const noexcept { return pickup - request.earliest_pickup; }
    Seconds ride() const noexcept { return dropoff - pickup; }
};

struct VehicleOutcome {
    VehicleId id = 0;
    LocationId start_location = 0;
    Seconds idle_s = 0;
    Seconds serving_s = 0;
    Seconds relocating_s = 0;
    int relocations = 0;
    int requests_served = 0;
};

struct EpochRecord {
    int epoch = 0;
    Seconds time = 0;
    int batch = 0;
    int pending = 0;
    int vehicles = 0;
    std::size_t pool = 0;
    int iterations = 0;
    double lp_objective = 0.0;
    double mip_objective = 0.0;
    std::vector<double> lp_trace;
    int unserved = 0;
    long pricing_nodes = 0;
    long mip_nodes = 0;
    bool budget_exhausted = false;
};

struct OccupancySample {
    Seconds time = 0;
    int occupied = 0;  // vehicles with at least one rider
    int riders = 0;
};

struct RelocationRecord {
    int epoch = 0;
    Seconds time = 0;
    int idle_vehicles = 0;
    double mpc_objective = 0.0;
    long mpc_unserved = 0;
    long mpc_nodes = 0;
    bool mpc_optimal = true;
    int moves = 0;
    Seconds travel_seconds = 0;
    int overflow_events = 0;
};

/// Everything a simulation run produced; the per-request list is the raw
/// material every summary statistic is recomputed from.
struct SimulationReport {
    std::string mode;
    std::uint64_t seed = 0;
    Seconds start = 0;
    Seconds end = 0;
    int zone_count = 0;
    std::vector<RequestOutcome> requests;
    std::vector<VehicleOutcome> vehicles;
    std::vector<EpochRecord> epochs;
    std::vector<OccupancySample> occupancy;
    std::vector<RelocationRecord> relocations;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
};

struct WaitStats {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Linear interpolation between order statistics at rank q * (n - 1).
double percentile(std::vector<double> sorted, double q);
WaitStats wait_stats(const std::vector<double> &values);

struct HistogramBin {
    Seconds lower = 0;
    Seconds upper = 0;  // exclusive
    std::size_t count = 0;
};

struct ZoneRow {
    ZoneId zone = 0;
    std::size_t requests = 0;
    double mean_wait = 0.0;
};

struct Summary {
    std::string mode;
    std::size_t requests = 0;
    std::size_t completed = 0;
    WaitStats waits;
    WaitStats rides;
    Seconds bin_seconds = 30;
    std::vector<HistogramBin> histogram;
    std::vector<ZoneRow> zones;
    std::vector<VehicleOutcome> vehicles;
    Seconds idle_s = 0;
    Seconds serving_s = 0;
    Seconds relocating_s = 0;
    double mean_riders_per_occupied = 0.0;
    std::size_t relocation_moves = 0;
    std::size_t violations = 0;
};

Summary summarize(const SimulationReport &report, Seconds bin_seconds = 30);

struct ZoneImprovement {
    ZoneId zone = 0;
    std::size_t requests = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::optional<double> improvement_pct;  // empty for zones without requests
};

struct Comparison {
    std::size_t requests = 0;
    std::string size_bucket;
    WaitStats a;
    WaitStats b;
    std::optional<double> improvement_pct;
    std::vector<ZoneImprovement> zones;
};

/// 100 (mean_b - mean_a) / mean_b overall and per origin zone. Both reports
/// must cover the same requests.
Comparison compare(const SimulationReport &a, const SimulationReport &b,
                   const std::vector<std::size_t> &size_thresholds = {40'000, 50'000});

/// "<40000", "40000-49999", ">=50000" style label.
std::string size_bucket(std::size_t requests, const std::vector<std::size_t> &thresholds);

std::string summary_json(const Summary &summary);
std::string comparison_json(const Comparison &comparison);

/// Raw tables (CSV) plus meta.json and summary.json into `dir`.
void write_report(const SimulationReport &report, const std::filesystem::path &dir);
/// Reads back what write_report produced (enough to summarize and compare).
SimulationReport load_report(const std::filesystem::path &dir);
/// Gnuplot-friendly "lower upper count" lines.
void write_histogram(const Summary &summary, const std::filesystem::path &file);

}  // namespace rtrs
