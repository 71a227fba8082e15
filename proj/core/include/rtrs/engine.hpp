#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtrs/demand.hpp"
#include "rtrs/dispatch.hpp"
#include "rtrs/forecast.hpp"
#include "rtrs/network.hpp"
#include "rtrs/relocate.hpp"
#include "rtrs/report.hpp"

namespace rtrs {

enum class Mode { Myopic, Forecast, Oracle };
enum class SharingMode { Constant, Online };

std::string to_string(Mode mode);
Mode parse_mode(const std::string &text);

struct SimConfig {
    Seconds epoch_seconds = 30;          // l^A
    Seconds relocation_period_s = 300;   // l^R
    int omega = 10;                      // epochs between relocations
    int fleet_size = 20;
    int capacity = 4;
    double alpha = 1.5;
    Seconds beta = 240;
    double rho = 420.0;
    double sharing_ratio = 1.2;          // w
    SharingMode sharing_mode = SharingMode::Constant;
    Mode mode = Mode::Myopic;
    int horizon = 6;                     // T, relocation periods
    std::uint64_t seed = 0;

    Seconds sim_start_s = 0;             // trips before this are history only
    Seconds min_end_s = 0;               // simulate at least until here
    Seconds drain_limit_s = 86'400;      // give up this long after the last request
    Seconds calendar_offset_s = 0;
    bool shuffle_placement = true;

    double forecast_scale = 1.0;
    int forecast_k_max = 8;
    ForecastGranularity forecast_granularity = ForecastGranularity::Period;

    int max_stops = 8;
    long pricing_node_budget = 4'000'000;
    int columns_per_vehicle = 25;
    int max_iterations = 200;
    long mip_node_limit = 20'000;
    bool close_gap = true;
    long mpc_node_limit = 200'000;

    bool freeze_scheduled = false;
    bool relocating_assignable = false;

    DispatchConfig dispatch() const;
    RoutingContext routing(const TravelTimeMatrix &travel) const;
    void validate() const;
};

/// Flat key=value lines, '#' comments. Unknown keys are errors.
SimConfig parse_config(std::istream &in, SimConfig base = {});
SimConfig load_config(const std::filesystem::path &path, SimConfig base = {});
void set_config_value(SimConfig &config, const std::string &key, const std::string &value);
std::string format_config(const SimConfig &config);

enum class RequestStatus { Unreleased, Waiting, Scheduled, Committed, PickedUp, Completed };

struct ActiveRider {
    RequestId request = -1;
    int riders = 1;
    LocationId dropoff = 0;
    Seconds pickup = 0;
    Seconds max_ride = 0;
};

/// Ground truth for one vehicle.
struct VehicleRecord {
    VehicleId id = 0;
    int capacity = 4;
    LocationId start_location = 0;
    LocationId location = 0;      // last location reached
    Seconds location_time = 0;
    Seconds leg_start = 0;        // when it left `location` toward schedule.front()
    std::deque<Stop> schedule;    // stops still ahead
    std::size_t committed = 0;    // leading schedule stops no longer open to replanning
    std::vector<ActiveRider> onboard;
    bool relocating = false;
    LocationId relocation_target = 0;
    Seconds relocation_arrival = 0;
    Seconds clock = 0;            // accounting cursor
    Seconds idle_s = 0;
    Seconds serving_s = 0;
    Seconds relocating_s = 0;
    int relocations = 0;
    int requests_served = 0;

    bool idle() const noexcept { return !relocating && schedule.empty(); }
    int load() const noexcept;
};

struct FleetState {
    std::vector<VehicleRecord> vehicles;
    std::vector<RequestOutcome> requests;  // indexed by request id
    std::vector<RequestStatus> status;
    std::vector<int> arrival_epoch;
};

struct EngineOptions {
    std::optional<std::filesystem::path> epoch_dump_dir;
    std::optional<std::filesystem::path> relocation_trace_dir;
};

/// Rolling-horizon simulation. `run` drives it end to end; the individual
/// steps are public for tests.
class Simulation {
public:
    Simulation(std::span<const TripRecord> trips, const Network &network, SimConfig config,
               EngineOptions options = {});

    bool done() const;
    /// One epoch: relocation (when due), batching, dispatch, commit, then
    /// advance the clock by one epoch.
    void step();
    SimulationReport finish();

    int epoch() const noexcept { return epoch_; }
    Seconds now() const noexcept { return static_cast<Seconds>(epoch_) * config_.epoch_seconds; }
    const FleetState &state() const noexcept { return state_; }
    const SimConfig &config() const noexcept { return config_; }
    Mode effective_mode() const noexcept { return mode_; }
    long forecast_fits() const noexcept { return forecast_fits_; }
    long relocation_calls() const noexcept { return relocation_calls_; }

    /// Locks in-progress stops; afterwards snapshot() starts every serving
    /// vehicle at the end of its locked prefix.
    void lock_in_progress();
    std::vector<VehicleSnapshot> snapshot() const;
    std::vector<Request> open_requests() const;
    void commit(const DispatchSolution &solution, std::span<const VehicleSnapshot> vehicles,
                std::span<const Request> offered);
    void advance_to(Seconds t);
    void release(std::span<const Request> batch);
    RelocationPlan relocate();

private:
    void advance_vehicle(VehicleRecord &v, Seconds t);
    void execute(VehicleRecord &v, const Stop &s);
    void violation(std::string text);
    double sharing(ZoneId i, ZoneId j) const;
    std::vector<std::vector<std::vector<int>>> demand_forecast(Seconds start) const;

    const Network *network_;
    SimConfig config_;
    EngineOptions options_;
    Mode mode_;
    RoutingContext ctx_;
    std::vector<TripRecord> sim_trips_;
    std::vector<Request> stream_;
    std::unique_ptr<EpochBatcher> batcher_;
    DemandSeries observed_;
    std::unique_ptr<DemandForecaster> forecaster_;
    FleetState state_;
    std::vector<std::vector<std::deque<int>>> sharing_samples_;
    int first_epoch_ = 0;
    int epoch_ = 0;
    Seconds last_request_time_ = 0;
    std::size_t completed_ = 0;
    long forecast_fits_ = 0;
    long relocation_calls_ = 0;
    SimulationReport report_;
};

SimulationReport run(std::span<const TripRecord> trips, const Network &network, const SimConfig &config,
                     const EngineOptions &options = {});

}  // namespace rtrs
