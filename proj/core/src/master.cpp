#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "rtrs/dispatch.hpp"
#include "rtrs/simplex.hpp"

namespace rtrs {

namespace {

struct MasterModel {
    lp::Problem problem;
    std::vector<int> vehicle_of_route;  // index into vehicles
    int first_route_var = 0;
};

MasterModel build_master(const ColumnPool &pool, std::span<const Request> requests,
                         std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties) {
    MasterModel m;
    std::unordered_map<RequestId, int> row_of;
    std::unordered_map<VehicleId, int> vidx;
    for (std::size_t i = 0; i < requests.size(); ++i) row_of.emplace(requests[i].id, static_cast<int>(i));
    for (std::size_t v = 0; v < vehicles.size(); ++v) vidx.emplace(vehicles[v].id, static_cast<int>(v));

    const auto nreq = static_cast<int>(requests.size());
    std::vector<std::vector<std::pair<int, double>>> rows(requests.size() + vehicles.size());
    for (int i = 0; i < nreq; ++i) {
        const int var = m.problem.add_variable(penalties[static_cast<std::size_t>(i)]);
        rows[static_cast<std::size_t>(i)].emplace_back(var, 1.0);
    }
    m.first_route_var = nreq;
    std::vector<bool> covered(vehicles.size(), false);
    for (const auto &route : pool.routes()) {
        const auto vit = vidx.find(route.vehicle);
        if (vit == vidx.end()) throw std::logic_error("column pool references an unknown vehicle");
        const int var = m.problem.add_variable(static_cast<double>(route.cost));
        for (auto id : route.served) {
            const auto rit = row_of.find(id);
            if (rit == row_of.end()) throw std::logic_error("column serves a request outside the master");
            rows[static_cast<std::size_t>(rit->second)].emplace_back(var, 1.0);
        }
        rows[static_cast<std::size_t>(nreq + vit->second)].emplace_back(var, 1.0);
        m.vehicle_of_route.push_back(vit->second);
        covered[static_cast<std::size_t>(vit->second)] = true;
    }
    for (std::size_t v = 0; v < vehicles.size(); ++v)
        if (!covered[v]) throw std::logic_error("master infeasible: vehicle without any column");
    for (auto &row : rows) m.problem.add_row(std::move(row), 1.0);
    return m;
}

DispatchSolution extract(const MasterModel &m, const ColumnPool &pool, std::span<const Request> requests,
                         std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties,
                         const std::vector<double> &x) {
    DispatchSolution sol;
    sol.chosen.resize(vehicles.size());
    std::vector<bool> have(vehicles.size(), false);
    std::vector<bool> served(requests.size(), false);
    std::unordered_map<RequestId, std::size_t> idx;
    for (std::size_t i = 0; i < requests.size(); ++i) idx.emplace(requests[i].id, i);
    for (std::size_t r = 0; r < pool.size(); ++r) {
        if (x[static_cast<std::size_t>(m.first_route_var) + r] < 0.5) continue;
        const auto v = static_cast<std::size_t>(m.vehicle_of_route[r]);
        if (have[v]) throw std::logic_error("two routes chosen for one vehicle");
        have[v] = true;
        sol.chosen[v] = pool.routes()[r];
        sol.objective += static_cast<double>(pool.routes()[r].cost);
        for (auto id : pool.routes()[r].served) {
            if (served[idx.at(id)]) throw std::logic_error("request served twice");
            served[idx.at(id)] = true;
        }
    }
    for (std::size_t v = 0; v < vehicles.size(); ++v)
        if (!have[v]) throw std::logic_error("vehicle left without a route");
    for (std::size_t i = 0; i < requests.size(); ++i)
        if (!served[i]) {
            sol.unserved.push_back(requests[i].id);
            sol.objective += penalties[i];
        }
    return sol;
}

}  // namespace

bool ColumnPool::add(Route route) {
    std::vector<std::tuple<StopKind, RequestId>> key;
    key.reserve(route.stops.size());
    for (const auto &s : route.stops) key.emplace_back(s.kind, s.request);
    if (!seen_.emplace(route.vehicle, std::move(key)).second) return false;
    routes_.push_back(std::move(route));
    return true;
}

RmpSolution solve_rmp_lp(const ColumnPool &pool, std::span<const Request> requests,
                         std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties) {
    const auto m = build_master(pool, requests, vehicles, penalties);
    const auto sol = lp::solve(m.problem);
    if (sol.status != lp::Status::Optimal) throw std::logic_error("restricted master LP did not solve to optimality");
    RmpSolution out;
    out.objective = sol.objective;
    out.z.assign(sol.x.begin(), sol.x.begin() + m.first_route_var);
    out.y.assign(sol.x.begin() + m.first_route_var, sol.x.end());
    out.request_duals.assign(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(requests.size()));
    out.vehicle_duals.assign(sol.duals.begin() + static_cast<std::ptrdiff_t>(requests.size()), sol.duals.end());
    return out;
}

DispatchSolution solve_final_mip(const ColumnPool &pool, std::span<const Request> requests,
                                 std::span<const VehicleSnapshot> vehicles, std::span<const double> penalties,
                                 long node_limit) {
    const auto m = build_master(pool, requests, vehicles, penalties);
    const auto nvars = static_cast<std::size_t>(m.problem.variable_count());

    // All-unserved fallback: each vehicle's first column serving nothing.
    std::vector<double> fallback(nvars, 0.0);
    bool have_fallback = true;
    for (std::size_t i = 0; i < requests.size(); ++i) fallback[i] = 1.0;
    for (std::size_t v = 0; v < vehicles.size(); ++v) {
        bool found = false;
        for (std::size_t r = 0; r < pool.size() && !found; ++r)
            if (static_cast<std::size_t>(m.vehicle_of_route[r]) == v && pool.routes()[r].served.empty()) {
                fallback[static_cast<std::size_t>(m.first_route_var) + r] = 1.0;
                found = true;
            }
        have_fallback = have_fallback && found;
    }

    std::vector<bool> integer(nvars, false);
    for (std::size_t j = static_cast<std::size_t>(m.first_route_var); j < nvars; ++j) integer[j] = true;
    lp::MipOptions opt;
    opt.node_limit = node_limit;
    const auto mip = lp::solve_mip(m.problem, integer, opt, have_fallback ? &fallback : nullptr);
    if (mip.status == lp::MipStatus::Infeasible) {
        if (!have_fallback) throw std::logic_error("final master has no feasible integer solution within budget");
        auto sol = extract(m, pool, requests, vehicles, penalties, fallback);
        sol.budget_exhausted = mip.budget_exhausted;
        return sol;
    }
    auto sol = extract(m, pool, requests, vehicles, penalties, mip.x);
    sol.mip_nodes = mip.nodes;
    sol.budget_exhausted = mip.budget_exhausted;
    sol.pool_size = pool.size();
    return sol;
}

}  // namespace rtrs
