#include <algorithm>
#include <stdexcept>

#include "rtrs/dispatch.hpp"

namespace rtrs {

DispatchSolution dispatch_epoch(std::span<const VehicleSnapshot> vehicles, std::span<const Request> pending, int epoch,
                                const DispatchConfig &config, const RoutingContext &ctx) {
    const RequestTable table(pending);
    std::vector<double> penalties;
    penalties.reserve(pending.size());
    for (const auto &r : pending) penalties.push_back(penalty(r, epoch, config.epoch_seconds, config.rho));

    ColumnPool pool;
    for (const auto &v : vehicles) {
        auto base = base_route(v, table, ctx);
        if (!base) throw std::logic_error("vehicle snapshot admits no feasible dropoff order");
        for (const auto &req : pending)
            if (auto ins = best_insertion(v, *base, req, table, ctx)) pool.add(std::move(*ins));
        pool.add(std::move(*base));
    }

    DispatchSolution out;
    long budget_left = config.pricing_node_budget;
    bool converged = false;
    RmpSolution lp;
    while (true) {
        lp = solve_rmp_lp(pool, pending, vehicles, penalties);
        out.lp_trace.push_back(lp.objective);
        if (out.iterations >= config.max_iterations || budget_left <= 0) break;
        ++out.iterations;

        int added = 0;
        bool round_complete = true;
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            PricingOptions opt;
            opt.max_stops = config.max_stops;
            opt.node_budget = budget_left;
            auto priced = price_routes(vehicles[v], table, lp.request_duals, lp.vehicle_duals[v], ctx, opt);
            budget_left -= priced.nodes;
            out.pricing_nodes += priced.nodes;
            if (priced.budget_exhausted) {
                out.budget_exhausted = true;
                round_complete = false;
            }
            int taken = 0;
            for (auto &pr : priced.routes) {
                if (taken >= config.columns_per_vehicle) break;
                if (pool.add(std::move(pr.route))) {
                    ++taken;
                    ++added;
                }
            }
            if (budget_left <= 0) {
                round_complete = v + 1 == vehicles.size() && round_complete;
                break;
            }
        }
        if (added == 0) {
            converged = round_complete;
            break;
        }
    }
    out.lp_objective = lp.objective;

    auto mip = solve_final_mip(pool, pending, vehicles, penalties, config.mip_node_limit);
    const double gap = mip.objective - lp.objective;
    if (config.close_gap && converged && !mip.budget_exhausted && gap > 1e-6 * std::max(1.0, mip.objective)) {
        // Any integer solution better than the incumbent uses only columns
        // whose reduced cost is below the gap.
        bool complete = true;
        long nodes_left = std::max(budget_left, config.pricing_node_budget / 2);
        int added = 0;
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            PricingOptions opt;
            opt.max_stops = config.max_stops;
            opt.node_budget = nodes_left;
            opt.threshold = gap - 1e-9;
            auto priced = price_routes(vehicles[v], table, lp.request_duals, lp.vehicle_duals[v], ctx, opt);
            nodes_left -= priced.nodes;
            out.pricing_nodes += priced.nodes;
            complete = complete && !priced.budget_exhausted;
            for (auto &pr : priced.routes)
                if (pool.add(std::move(pr.route))) ++added;
            if (nodes_left <= 0) {
                complete = false;
                break;
            }
        }
        if (added > 0) {
            auto refined = solve_final_mip(pool, pending, vehicles, penalties, config.mip_node_limit);
            if (refined.objective <= mip.objective) mip = std::move(refined);
        }
        if (!complete) out.budget_exhausted = true;
    }

    out.chosen = std::move(mip.chosen);
    out.unserved = std::move(mip.unserved);
    out.objective = mip.objective;
    out.mip_nodes = mip.mip_nodes;
    out.pool_size = pool.size();
    out.budget_exhausted = out.budget_exhausted || mip.budget_exhausted;
    return out;
}

}  // namespace rtrs
