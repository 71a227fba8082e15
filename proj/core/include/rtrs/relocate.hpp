#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "rtrs/network.hpp"
#include "rtrs/types.hpp"

namespace rtrs {

template <typename T>
using Cube = std::vector<std::vector<std::vector<T>>>;  // [i][j][t]

struct MpcInput {
    int horizon = 1;                           // T
    Cube<double> demand;                       // lambda_ijt >= 0
    std::vector<std::vector<double>> sharing;  // w_ij >= 1
    std::vector<std::vector<int>> available;   // A_it, Z x T
    std::vector<std::vector<int>> tt;          // whole periods, Z x Z

    int zone_count() const noexcept { return static_cast<int>(available.size()); }
    /// ceil(lambda_ijt / w_ij): demand in vehicle equivalents.
    int vehicle_demand(int i, int j, int t) const;
};

/// Periods a flow started at t needs before it counts at its destination:
/// tt_ij, at least one (staying put consumes the period).
inline int arrival_lag(const MpcInput &in, int i, int j) {
    return std::max(1, in.tt[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
}

struct MpcSolution {
    Cube<int> relocate;   // x^r_ijt
    Cube<int> passenger;  // x^p_ijt
    Cube<int> unserved;   // u_ijt
    double objective = 0.0;  // sum (T - t) u + sum tt x^r
    long unserved_total = 0;
    long nodes = 0;
    bool optimal = true;
};

/// Exact MPC-MIP by branch and bound over its LP relaxation. Among
/// objective ties the solution with fewer unserved requests wins.
MpcSolution solve_mpc(const MpcInput &input, long node_limit = 200'000);

/// Objective of an arbitrary candidate, no feasibility check.
double mpc_objective(const MpcInput &input, const MpcSolution &candidate);

/// Demand-balance and vehicle-conservation violations of a candidate.
std::vector<std::string> check_mpc(const MpcInput &input, const MpcSolution &candidate);

/// Feasible candidate: every vehicle stays in its zone, all demand unserved.
MpcSolution mpc_stay_solution(const MpcInput &input);

// ---------------------------------------------------------------------------

enum class VehicleState { Idle, Serving, Relocating };

struct FleetVehicleView {
    VehicleId id = 0;
    VehicleState state = VehicleState::Idle;
    LocationId location = 0;        // current position when idle
    LocationId final_location = 0;  // where the committed route or relocation ends
    Seconds final_time = 0;
};

struct IdleEstimate {
    std::vector<std::vector<int>> counts;               // A_it, Z x T
    std::vector<std::vector<FleetVehicleView>> idle_now;  // per zone, ascending id
};

/// A_i0 counts vehicles idle now; busy (serving or relocating) vehicles count
/// in the zone where they finish, at period max(1, floor((finish - now) / period)).
IdleEstimate estimate_idle(std::span<const FleetVehicleView> fleet, const ZoneMap &zones, int horizon,
                           Seconds period_seconds, Seconds now);

struct ZoneAssignment {
    std::vector<int> target_of;  // per vehicle, -1 when staying
    Seconds cost = 0;
    int shortfall = 0;           // requested moves that could not be staffed
};

/// Min-cost assignment of vehicles to targets with exact per-target counts
/// (reduced optimally when the counts exceed the vehicles available).
ZoneAssignment assign_vehicles(std::span<const int> target_counts, const std::vector<std::vector<Seconds>> &cost);

struct RelocationMove {
    VehicleId vehicle = 0;
    ZoneId from_zone = 0;
    ZoneId to_zone = 0;
    LocationId target = 0;
    Seconds travel_seconds = 0;
};

struct RelocationPlan {
    std::vector<RelocationMove> moves;
    Seconds total_seconds = 0;
    int overflow_events = 0;
};

/// Turns first-period zone flows into concrete moves: per origin zone, idle
/// vehicles go to the closest stop of their target zone at minimum total
/// travel time. Diagonal flows mean "stay".
RelocationPlan solve_vr(const std::vector<std::vector<int>> &flows,
                        const std::vector<std::vector<FleetVehicleView>> &idle, const Network &network);

}  // namespace rtrs
