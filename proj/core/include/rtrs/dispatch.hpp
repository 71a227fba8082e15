#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtrs/demand.hpp"
#include "rtrs/network.hpp"
#include "rtrs/types.hpp"

namespace rtrs {

/// A rider already in the vehicle at snapshot time.
struct Rider {
    RequestId request = -1;
    LocationId dropoff = 0;
    int riders = 1;
    Seconds elapsed_ride = 0;  // measured at the vehicle's earliest departure
    Seconds max_ride = 0;
};

struct VehicleSnapshot {
    VehicleId id = 0;
    LocationId start_location = 0;
    Seconds earliest_departure = 0;
    int capacity = 4;
    std::vector<Rider> onboard;

    int load() const {
        int n = 0;
        for (const auto &r : onboard) n += r.riders;
        return n;
    }
};

enum class StopKind : unsigned char { Pickup, Dropoff };

struct Stop {
    LocationId location = 0;
    StopKind kind = StopKind::Pickup;
    RequestId request = -1;
    Seconds time = 0;

    friend bool operator==(const Stop &, const Stop &) = default;
};

struct Route {
    VehicleId vehicle = 0;
    std::vector<Stop> stops;
    Seconds cost = 0;                // total waiting time of requests picked up on this route
    std::vector<RequestId> served;   // ascending

    bool serves(RequestId id) const;
    Seconds finish_time(Seconds departure) const { return stops.empty() ? departure : stops.back().time; }
};

/// Lexicographic order on stop sequences by (time, location, request, kind);
/// shorter prefixes sort first.
bool route_less(const Route &a, const Route &b);

struct RoutingContext {
    const TravelTimeMatrix *travel = nullptr;
    double alpha = 1.5;
    Seconds beta = 240;

    Seconds max_ride(const Request &r) const { return max_ride_seconds(r.shortest_time, alpha, beta); }
};

/// Position lookup for the requests of one dispatch call.
class RequestTable {
public:
    RequestTable() = default;
    explicit RequestTable(std::span<const Request> requests);
    const Request *find(RequestId id) const;
    std::size_t index_of(RequestId id) const { return index_.at(id); }
    std::span<const Request> all() const noexcept { return requests_; }

private:
    std::span<const Request> requests_;
    std::unordered_map<RequestId, std::size_t> index_;
};

/// Penalty for leaving a request unserved in epoch `epoch`:
/// rho * 2^((epoch * epoch_len - e_c) / (10 * epoch_len)).
double penalty(const Request &request, int epoch, Seconds epoch_len, double rho);

/// Sum over requests picked up on the route of (pickup time - e_c).
Seconds route_waiting_cost(const Route &route, const RequestTable &requests);

struct StopSpec {
    StopKind kind;
    RequestId request;
};

/// Times a stop sequence for the vehicle and returns the route when it is
/// feasible: capacity at every prefix, pickups before dropoffs, every rider
/// delivered within max ride, every onboard rider dropped.
std::optional<Route> build_route(const VehicleSnapshot &vehicle, std::span<const StopSpec> sequence,
                                 const RequestTable &requests, const RoutingContext &ctx);

/// Independent audit of a timed route; returns human-readable violations.
std::vector<std::string> check_route(const Route &route, const VehicleSnapshot &vehicle, const RequestTable &requests,
                                     const RoutingContext &ctx);

/// The dropoff-only route for the vehicle's current riders (earliest
/// completion, then lexicographic). Empty stop list for an empty vehicle.
std::optional<Route> base_route(const VehicleSnapshot &vehicle, const RequestTable &requests,
                                const RoutingContext &ctx);

/// Cheapest feasible insertion of one request into the base route.
std::optional<Route> best_insertion(const VehicleSnapshot &vehicle, const Route &base, const Request &request,
                                    const RequestTable &requests, const RoutingContext &ctx);

// ---------------------------------------------------------------------------
// Pricing

struct PricingOptions {
    int max_stops = 8;
    long node_budget = 2'000'000;
    /// Routes are returned when reduced cost < threshold.
    double threshold = -1e-6;
};

struct PricedRoute {
    Route route;
    double reduced_cost = 0.0;
};

struct PricingResult {
    std::vector<PricedRoute> routes;  // sorted by reduced cost, then route_less
    long nodes = 0;
    bool budget_exhausted = false;
};

/// Exhaustive enumeration of feasible stop sequences of increasing length
/// (2, 4, ..., max_stops) returning every route with
/// c_r - sum(request_duals over served) - vehicle_dual < threshold.
/// `request_duals` is indexed like `requests.all()`. Stops when the node
/// budget runs out and returns what it has.
PricingResult price_routes(const VehicleSnapshot &vehicle, const RequestTable &requests,
                           std::span<const double> request_duals, double vehicle_dual, const RoutingContext &ctx,
                           const PricingOptions &options);

// ---------------------------------------------------------------------------
// Restricted master

class ColumnPool {
public:
    /// False when an identical route for the same vehicle is already present.
    bool add(Route route);
    const std::vector<Route> &routes() const noexcept { return routes_; }
    std::size_t size() const noexcept { return routes_.size(); }

private:
    std::vector<Route> routes_;
    std::set<std::pair<VehicleId, std::vector<std::tuple<StopKind, RequestId>>>> seen_;
};

struct RmpSolution {
    double objective = 0.0;
    std::vector<double> y;              // per pool route
    std::vector<double> z;              // per request
    std::vector<double> request_duals;  // mu_i
    std::vector<double> vehicle_duals;  // nu_v, indexed like vehicles
};

/// LP relaxation of the route-selection master. Throws std::logic_error when
/// some vehicle has no column (the precondition guaranteeing feasibility).
RmpSolution solve_rmp_lp(const ColumnPool &pool, std::span<const Request> requests,
                         std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties);

struct DispatchSolution {
    std::vector<Route> chosen;  // one per vehicle, same order as the vehicles given
    std::vector<RequestId> unserved;
    double objective = 0.0;
    double lp_objective = 0.0;
    std::vector<double> lp_trace;  // LP objective after each column-generation round
    std::size_t pool_size = 0;
    int iterations = 0;
    long pricing_nodes = 0;
    long mip_nodes = 0;
    bool budget_exhausted = false;
};

/// Integer master over the pool by branch and bound; `node_limit` 0 returns
/// the all-unserved fallback built from each vehicle's base column.
DispatchSolution solve_final_mip(const ColumnPool &pool, std::span<const Request> requests,
                                 std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties,
                                 long node_limit);

struct DispatchConfig {
    Seconds epoch_seconds = 30;
    double rho = 420.0;
    int max_stops = 8;
    long pricing_node_budget = 4'000'000;  // per epoch, all vehicles
    int columns_per_vehicle = 25;          // per pricing round
    int max_iterations = 200;
    long mip_node_limit = 20'000;
    bool close_gap = true;
};

/// Column generation for one epoch: seed, iterate LP/pricing until no
/// improving column (or budget), then solve the integer master.
DispatchSolution dispatch_epoch(std::span<const VehicleSnapshot> vehicles, std::span<const Request> pending, int epoch,
                                const DispatchConfig &config, const RoutingContext &ctx);

}  // namespace rtrs
