#include <algorithm>
#include <functional>

#include "rtrs/dispatch.hpp"

namespace rtrs {

namespace {

struct Passenger {
    RequestId request;
    LocationId dropoff;
    Seconds deadline;
    int riders;
};

class Enumerator {
public:
    Enumerator(const VehicleSnapshot &vehicle, const RequestTable &requests, std::span<const double> duals,
               double vehicle_dual, const RoutingContext &ctx, const PricingOptions &opt)
        : vehicle_(vehicle), requests_(requests.all()), duals_(duals), vehicle_dual_(vehicle_dual),
          tt_(*ctx.travel), opt_(opt) {
        for (const auto &r : vehicle.onboard) {
            const Seconds pickup = vehicle.earliest_departure - r.elapsed_ride;
            onboard_.push_back({r.request, r.dropoff, pickup + r.max_ride, r.riders});
        }
        limit_ = std::max(opt.max_stops, static_cast<int>(vehicle.onboard.size()));
        for (const auto &r : requests_) max_ride_.push_back(ctx.max_ride(r));
        picked_.assign(requests_.size(), false);

        std::vector<double> gains;
        for (double mu : duals_)
            if (mu > 0) gains.push_back(mu);
        std::sort(gains.begin(), gains.end(), std::greater<>());
        gain_prefix_.push_back(0.0);
        for (double g : gains) gain_prefix_.push_back(gain_prefix_.back() + g);
    }

    PricingResult run() {
        int prev = -1;
        for (int level = 2;; level += 2) {
            const int cap = std::min(level, limit_);
            window_lo_ = prev;
            window_hi_ = cap;
            dfs(vehicle_.start_location, vehicle_.earliest_departure, vehicle_.load(), 0, 0.0);
            if (result_.budget_exhausted || cap >= limit_) break;
            prev = cap;
        }
        std::sort(result_.routes.begin(), result_.routes.end(), [](const PricedRoute &a, const PricedRoute &b) {
            if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
            return route_less(a.route, b.route);
        });
        return std::move(result_);
    }

private:
    double future_gain(int stops) const {
        const int slots = (limit_ - stops - static_cast<int>(onboard_.size())) / 2;
        if (slots <= 0) return 0.0;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(slots), gain_prefix_.size() - 1);
        return gain_prefix_[k];
    }

    void record(double reduced) {
        Route r;
        r.vehicle = vehicle_.id;
        r.stops = path_;
        r.cost = cost_;
        r.served = served_;
        std::sort(r.served.begin(), r.served.end());
        result_.routes.push_back({std::move(r), reduced});
    }

    void dfs(LocationId loc, Seconds time, int load, int stops, double dual_sum) {
        if (result_.nodes >= opt_.node_budget) {
            result_.budget_exhausted = true;
            return;
        }
        ++result_.nodes;

        // Every rider still aboard must remain deliverable on time.
        for (const auto &p : onboard_)
            if (time + tt_(loc, p.dropoff) > p.deadline) return;

        const double reduced = static_cast<double>(cost_) - dual_sum - vehicle_dual_;
        if (onboard_.empty() && stops > window_lo_ && stops <= window_hi_ && reduced < opt_.threshold &&
            (stops > 0 || vehicle_.onboard.empty()))
            record(reduced);
        if (stops >= window_hi_) return;
        // Waiting cost never decreases along a path; duals of future pickups are the only gain.
        if (reduced - future_gain(stops) >= opt_.threshold) return;

        for (std::size_t k = 0; k < onboard_.size(); ++k) {
            const Passenger p = onboard_[k];
            const Seconds arrive = time + tt_(loc, p.dropoff);
            onboard_.erase(onboard_.begin() + static_cast<std::ptrdiff_t>(k));
            path_.push_back({p.dropoff, StopKind::Dropoff, p.request, arrive});
            dfs(p.dropoff, arrive, load - p.riders, stops + 1, dual_sum);
            path_.pop_back();
            onboard_.insert(onboard_.begin() + static_cast<std::ptrdiff_t>(k), p);
            if (result_.budget_exhausted) return;
        }

        if (stops + 2 + static_cast<int>(onboard_.size()) > window_hi_) return;
        for (std::size_t i = 0; i < requests_.size(); ++i) {
            if (picked_[i]) continue;
            const auto &req = requests_[i];
            if (load + req.riders > vehicle_.capacity) continue;
            const Seconds at = std::max(time + tt_(loc, req.origin), req.earliest_pickup);
            const Seconds wait = at - req.earliest_pickup;
            picked_[i] = true;
            cost_ += wait;
            served_.push_back(req.id);
            onboard_.push_back({req.id, req.destination, at + max_ride_[i], req.riders});
            path_.push_back({req.origin, StopKind::Pickup, req.id, at});
            dfs(req.origin, at, load + req.riders, stops + 1, dual_sum + duals_[i]);
            path_.pop_back();
            onboard_.pop_back();
            served_.pop_back();
            cost_ -= wait;
            picked_[i] = false;
            if (result_.budget_exhausted) return;
        }
    }

    const VehicleSnapshot &vehicle_;
    std::span<const Request> requests_;
    std::span<const double> duals_;
    double vehicle_dual_;
    const TravelTimeMatrix &tt_;
    PricingOptions opt_;

    int limit_ = 0;
    int window_lo_ = -1;
    int window_hi_ = 0;
    std::vector<Seconds> max_ride_;
    std::vector<double> gain_prefix_;
    std::vector<bool> picked_;
    std::vector<Passenger> onboard_;
    std::vector<Stop> path_;
    std::vector<RequestId> served_;
    Seconds cost_ = 0;
    PricingResult result_;
};

}  // namespace

PricingResult price_routes(const VehicleSnapshot &vehicle, const RequestTable &requests,
                           std::span<const double> request_duals, double vehicle_dual, const RoutingContext &ctx,
                           const PricingOptions &options) {
    Enumerator e(vehicle, requests, request_duals, vehicle_dual, ctx, options);
    return e.run();
}

}  // namespace rtrs
