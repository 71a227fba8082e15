#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "rtrs/min_cost_flow.hpp"
#include "rtrs/relocate.hpp"
#include "rtrs/simplex.hpp"

namespace rtrs {

namespace {

template <typename T>
Cube<T> make_cube(int z, int t, T value = T{}) {
    return Cube<T>(static_cast<std::size_t>(z),
                   std::vector<std::vector<T>>(static_cast<std::size_t>(z),
                                               std::vector<T>(static_cast<std::size_t>(t), value)));
}

void validate(const MpcInput &in) {
    const auto z = static_cast<std::size_t>(in.zone_count());
    const auto t = static_cast<std::size_t>(in.horizon);
    if (in.horizon < 1) throw ConfigError("relocation horizon must be at least 1");
    if (in.demand.size() != z || in.sharing.size() != z || in.tt.size() != z)
        throw std::invalid_argument("MPC input zone dimensions disagree");
    for (std::size_t i = 0; i < z; ++i) {
        if (in.available[i].size() != t || in.demand[i].size() != z || in.sharing[i].size() != z ||
            in.tt[i].size() != z)
            throw std::invalid_argument("MPC input dimensions disagree");
        for (std::size_t j = 0; j < z; ++j) {
            if (in.demand[i][j].size() != t) throw std::invalid_argument("MPC demand horizon mismatch");
            if (!(in.sharing[i][j] >= 1.0)) throw std::invalid_argument("sharing ratio below 1");
            if (in.tt[i][j] < 0) throw std::invalid_argument("negative zone travel time");
            for (double d : in.demand[i][j])
                if (!(d >= 0.0)) throw std::invalid_argument("negative or NaN demand");
        }
        for (int a : in.available[i])
            if (a < 0) throw std::invalid_argument("negative vehicle availability");
    }
}

struct MpcModel {
    lp::Problem problem;
    Cube<int> xr, xp, u;  // variable index or -1
    long u_bound = 0;
};

MpcModel build_model(const MpcInput &in) {
    const int Z = in.zone_count();
    const int T = in.horizon;
    MpcModel m;
    m.xr = make_cube(Z, T, -1);
    m.xp = make_cube(Z, T, -1);
    m.u = make_cube(Z, T, -1);

    // Pairs without demand so far cannot carry passengers or backlog.
    auto active = make_cube(Z, T, false);
    for (int i = 0; i < Z; ++i)
        for (int j = 0; j < Z; ++j) {
            long cum = 0;
            for (int t = 0; t < T; ++t) {
                cum += in.vehicle_demand(i, j, t);
                active[i][j][t] = cum > 0;
                m.u_bound += cum;
            }
        }
    const double K = static_cast<double>(m.u_bound + 1);

    for (int t = 0; t < T; ++t)
        for (int i = 0; i < Z; ++i)
            for (int j = 0; j < Z; ++j) {
                m.xr[i][j][t] = m.problem.add_variable(K * in.tt[i][j]);
                if (active[i][j][t]) {
                    m.xp[i][j][t] = m.problem.add_variable(0.0);
                    m.u[i][j][t] = m.problem.add_variable(K * (T - t) + 1.0);
                }
            }

    for (int t = 0; t < T; ++t)
        for (int i = 0; i < Z; ++i)
            for (int j = 0; j < Z; ++j) {
                if (!active[i][j][t]) continue;
                std::vector<std::pair<int, double>> row{{m.xp[i][j][t], 1.0}, {m.u[i][j][t], 1.0}};
                if (t > 0 && m.u[i][j][t - 1] >= 0) row.emplace_back(m.u[i][j][t - 1], -1.0);
                m.problem.add_row(std::move(row), in.vehicle_demand(i, j, t));
            }

    for (int t = 0; t < T; ++t)
        for (int i = 0; i < Z; ++i) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < Z; ++j) {
                row.emplace_back(m.xr[i][j][t], 1.0);
                if (m.xp[i][j][t] >= 0) row.emplace_back(m.xp[i][j][t], 1.0);
            }
            for (int j = 0; j < Z; ++j) {
                const int s = t - arrival_lag(in, j, i);
                if (s < 0) continue;
                row.emplace_back(m.xr[j][i][s], -1.0);
                if (m.xp[j][i][s] >= 0) row.emplace_back(m.xp[j][i][s], -1.0);
            }
            m.problem.add_row(std::move(row), in.available[i][t]);
        }
    return m;
}

std::vector<double> to_vector(const MpcModel &m, const MpcSolution &s) {
    std::vector<double> x(static_cast<std::size_t>(m.problem.variable_count()), 0.0);
    for (std::size_t i = 0; i < m.xr.size(); ++i)
        for (std::size_t j = 0; j < m.xr[i].size(); ++j)
            for (std::size_t t = 0; t < m.xr[i][j].size(); ++t) {
                x[static_cast<std::size_t>(m.xr[i][j][t])] = s.relocate[i][j][t];
                if (m.xp[i][j][t] >= 0) x[static_cast<std::size_t>(m.xp[i][j][t])] = s.passenger[i][j][t];
                if (m.u[i][j][t] >= 0) x[static_cast<std::size_t>(m.u[i][j][t])] = s.unserved[i][j][t];
            }
    return x;
}

int rounded(const std::vector<double> &x, int var) {
    return var < 0 ? 0 : static_cast<int>(std::llround(x[static_cast<std::size_t>(var)]));
}

}  // namespace

int MpcInput::vehicle_demand(int i, int j, int t) const {
    const double lam = demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
    const double w = sharing[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    // Guard against 2.0000000001 style ratios turning into an extra vehicle.
    return static_cast<int>(std::ceil(lam / w - 1e-9));
}

double mpc_objective(const MpcInput &in, const MpcSolution &s) {
    double obj = 0.0;
    const int Z = in.zone_count();
    for (int i = 0; i < Z; ++i)
        for (int j = 0; j < Z; ++j)
            for (int t = 0; t < in.horizon; ++t)
                obj += static_cast<double>(in.horizon - t) * s.unserved[i][j][t] +
                       static_cast<double>(in.tt[i][j]) * s.relocate[i][j][t];
    return obj;
}

std::vector<std::string> check_mpc(const MpcInput &in, const MpcSolution &s) {
    std::vector<std::string> out;
    const int Z = in.zone_count();
    const int T = in.horizon;
    for (int i = 0; i < Z; ++i)
        for (int j = 0; j < Z; ++j)
            for (int t = 0; t < T; ++t) {
                if (s.relocate[i][j][t] < 0 || s.passenger[i][j][t] < 0 || s.unserved[i][j][t] < 0)
                    out.push_back(fmt::format("negative flow at ({},{},{})", i, j, t));
                const int prev = t > 0 ? s.unserved[i][j][t - 1] : 0;
                if (s.passenger[i][j][t] + s.unserved[i][j][t] - prev != in.vehicle_demand(i, j, t))
                    out.push_back(fmt::format("demand balance broken at ({},{},{})", i, j, t));
            }
    for (int i = 0; i < Z; ++i)
        for (int t = 0; t < T; ++t) {
            long lhs = 0;
            long inflow = 0;
            for (int j = 0; j < Z; ++j) {
                lhs += s.relocate[i][j][t] + s.passenger[i][j][t];
                const int src = t - arrival_lag(in, j, i);
                if (src >= 0) inflow += s.relocate[j][i][src] + s.passenger[j][i][src];
            }
            if (lhs != in.available[i][t] + inflow)
                out.push_back(fmt::format("vehicle conservation broken at zone {} period {}: out {} vs in {}", i, t,
                                          lhs, in.available[i][t] + inflow));
        }
    return out;
}

MpcSolution mpc_stay_solution(const MpcInput &in) {
    validate(in);
    const int Z = in.zone_count();
    const int T = in.horizon;
    MpcSolution s;
    s.relocate = make_cube(Z, T, 0);
    s.passenger = make_cube(Z, T, 0);
    s.unserved = make_cube(Z, T, 0);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < Z; ++i) {
            int avail = in.available[i][t];
            if (t > 0) avail += s.relocate[i][i][t - 1];
            for (int j = 0; j < Z; ++j) {
                if (j == i) continue;
                const int src = t - arrival_lag(in, j, i);
                if (src >= 0) avail += s.relocate[j][i][src];
            }
            s.relocate[i][i][t] = avail;
            for (int j = 0; j < Z; ++j)
                s.unserved[i][j][t] = (t > 0 ? s.unserved[i][j][t - 1] : 0) + in.vehicle_demand(i, j, t);
        }
    s.objective = mpc_objective(in, s);
    for (const auto &a : s.unserved)
        for (const auto &b : a)
            for (int v : b) s.unserved_total += v;
    s.optimal = false;
    return s;
}

MpcSolution solve_mpc(const MpcInput &in, long node_limit) {
    validate(in);
    const int Z = in.zone_count();
    const int T = in.horizon;
    const auto m = build_model(in);
    const auto stay = mpc_stay_solution(in);
    const auto incumbent = to_vector(m, stay);

    lp::MipOptions opt;
    opt.node_limit = node_limit;
    opt.integral_objective = true;
    const std::vector<bool> integer(static_cast<std::size_t>(m.problem.variable_count()), true);
    const auto mip = lp::solve_mip(m.problem, integer, opt, &incumbent);
    if (mip.status == lp::MipStatus::Infeasible)
        throw std::logic_error("MPC model rejected the stay-in-place solution");

    MpcSolution s;
    s.relocate = make_cube(Z, T, 0);
    s.passenger = make_cube(Z, T, 0);
    s.unserved = make_cube(Z, T, 0);
    for (int i = 0; i < Z; ++i)
        for (int j = 0; j < Z; ++j)
            for (int t = 0; t < T; ++t) {
                s.relocate[i][j][t] = rounded(mip.x, m.xr[i][j][t]);
                s.passenger[i][j][t] = rounded(mip.x, m.xp[i][j][t]);
                s.unserved[i][j][t] = rounded(mip.x, m.u[i][j][t]);
                s.unserved_total += s.unserved[i][j][t];
            }
    s.objective = mpc_objective(in, s);
    s.nodes = mip.nodes;
    s.optimal = mip.status == lp::MipStatus::Optimal;
    if (auto bad = check_mpc(in, s); !bad.empty())
        throw std::logic_error("MPC solution violates conservation: " + bad.front());
    return s;
}

// ---------------------------------------------------------------------------

IdleEstimate estimate_idle(std::span<const FleetVehicleView> fleet, const ZoneMap &zones, int horizon,
                           Seconds period_seconds, Seconds now) {
    if (horizon < 1 || period_seconds <= 0) throw ConfigError("invalid relocation horizon or period");
    const auto Z = static_cast<std::size_t>(zones.zone_count());
    IdleEstimate est;
    est.counts.assign(Z, std::vector<int>(static_cast<std::size_t>(horizon), 0));
    est.idle_now.resize(Z);
    for (const auto &v : fleet) {
        if (v.state == VehicleState::Idle) {
            const auto z = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(v.location)]);
            ++est.counts[z][0];
            est.idle_now[z].push_back(v);
            continue;
        }
        const Seconds left = std::max<Seconds>(0, v.final_time - now);
        const auto p = std::max<Seconds>(1, left / period_seconds);
        if (p >= horizon) continue;
        const auto z = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(v.final_location)]);
        ++est.counts[z][static_cast<std::size_t>(p)];
    }
    for (auto &list : est.idle_now)
        std::sort(list.begin(), list.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    return est;
}

ZoneAssignment assign_vehicles(std::span<const int> target_counts, const std::vector<std::vector<Seconds>> &cost) {
    const int n = static_cast<int>(cost.size());
    const int m = static_cast<int>(target_counts.size());
    ZoneAssignment out;
    out.target_of.assign(static_cast<std::size_t>(n), -1);
    long wanted = 0;
    for (int c : target_counts) {
        if (c < 0) throw std::invalid_argument("negative relocation count");
        wanted += c;
    }
    if (wanted == 0) return out;

    const int source = n + m;
    const int sink = source + 1;
    MinCostFlow flow(n + m + 2);
    std::vector<std::vector<int>> handle(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(m), -1));
    for (int v = 0; v < n; ++v) {
        if (static_cast<int>(cost[static_cast<std::size_t>(v)].size()) != m)
            throw std::invalid_argument("assignment cost row has the wrong width");
        flow.add_edge(source, v, 1, 0);
        for (int j = 0; j < m; ++j)
            if (target_counts[static_cast<std::size_t>(j)] > 0)
                handle[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)] =
                    flow.add_edge(v, n + j, 1, cost[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < m; ++j)
        if (target_counts[static_cast<std::size_t>(j)] > 0)
            flow.add_edge(n + j, sink, target_counts[static_cast<std::size_t>(j)], 0);
    const auto res = flow.solve(source, sink, wanted);
    out.cost = res.cost;
    out.shortfall = static_cast<int>(wanted - res.flow);
    for (int v = 0; v < n; ++v)
        for (int j = 0; j < m; ++j) {
            const int h = handle[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
            if (h >= 0 && flow.flow(h) > 0) out.target_of[static_cast<std::size_t>(v)] = j;
        }
    return out;
}

RelocationPlan solve_vr(const std::vector<std::vector<int>> &flows,
                        const std::vector<std::vector<FleetVehicleView>> &idle, const Network &network) {
    const int Z = network.zones.zone_count();
    if (static_cast<int>(flows.size()) != Z || static_cast<int>(idle.size()) != Z)
        throw std::invalid_argument("relocation flows do not match the zone count");
    RelocationPlan plan;
    for (int i = 0; i < Z; ++i) {
        const auto &vehicles = idle[static_cast<std::size_t>(i)];
        std::vector<int> targets;
        std::vector<int> counts;
        for (int j = 0; j < Z; ++j) {
            const int c = flows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (j == i || c <= 0) continue;
            targets.push_back(j);
            counts.push_back(c);
        }
        if (targets.empty()) continue;
        std::vector<std::vector<Seconds>> cost(vehicles.size());
        std::vector<std::vector<LocationId>> stop(vehicles.size());
        for (std::size_t v = 0; v < vehicles.size(); ++v)
            for (int j : targets) {
                const auto loc = network.closest_in_zone(vehicles[v].location, j);
                stop[v].push_back(loc);
                cost[v].push_back(network.travel_time(vehicles[v].location, loc));
            }
        const auto a = assign_vehicles(counts, cost);
        if (a.shortfall > 0) ++plan.overflow_events;
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            const int k = a.target_of[v];
            if (k < 0) continue;
            RelocationMove mv;
            mv.vehicle = vehicles[v].id;
            mv.from_zone = i;
            mv.to_zone = targets[static_cast<std::size_t>(k)];
            mv.target = stop[v][static_cast<std::size_t>(k)];
            mv.travel_seconds = cost[v][static_cast<std::size_t>(k)];
            plan.total_seconds += mv.travel_seconds;
            plan.moves.push_back(mv);
        }
    }
    return plan;
}

}  // namespace rtrs
