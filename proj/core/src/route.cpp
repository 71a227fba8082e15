#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "rtrs/dispatch.hpp"

namespace rtrs {

namespace {

struct Onboard {
    Seconds pickup;
    Seconds deadline;
    int riders;
};

std::vector<StopSpec> specs_of(const Route &r) {
    std::vector<StopSpec> out;
    out.reserve(r.stops.size());
    for (const auto &s : r.stops) out.push_back({s.kind, s.request});
    return out;
}

// Earlier completion first, then lexicographic stop order.
bool better_tie(const Route &cand, const Route &incumbent, Seconds departure) {
    const auto fc = cand.finish_time(departure), fi = incumbent.finish_time(departure);
    if (fc != fi) return fc < fi;
    return route_less(cand, incumbent);
}

}  // namespace

bool Route::serves(RequestId id) const { return std::binary_search(served.begin(), served.end(), id); }

bool route_less(const Route &a, const Route &b) {
    auto key = [](const Stop &s) { return std::make_tuple(s.time, s.location, s.request, static_cast<int>(s.kind)); };
    return std::lexicographical_compare(a.stops.begin(), a.stops.end(), b.stops.begin(), b.stops.end(),
                                        [&](const Stop &x, const Stop &y) { return key(x) < key(y); });
}

RequestTable::RequestTable(std::span<const Request> requests) : requests_(requests) {
    for (std::size_t i = 0; i < requests.size(); ++i) index_.emplace(requests[i].id, i);
}

const Request *RequestTable::find(RequestId id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &requests_[it->second];
}

double penalty(const Request &request, int epoch, Seconds epoch_len, double rho) {
    const double delay = static_cast<double>(static_cast<Seconds>(epoch) * epoch_len - request.earliest_pickup);
    return rho * std::exp2(delay / (10.0 * static_cast<double>(epoch_len)));
}

Seconds route_waiting_cost(const Route &route, const RequestTable &requests) {
    Seconds total = 0;
    for (const auto &s : route.stops) {
        if (s.kind != StopKind::Pickup) continue;
        if (const auto *r = requests.find(s.request)) total += s.time - r->earliest_pickup;
    }
    return total;
}

std::optional<Route> build_route(const VehicleSnapshot &vehicle, std::span<const StopSpec> sequence,
                                 const RequestTable &requests, const RoutingContext &ctx) {
    const auto &tt = *ctx.travel;
    Route route;
    route.vehicle = vehicle.id;
    route.stops.reserve(sequence.size());

    std::map<RequestId, Onboard> onboard;
    std::map<RequestId, LocationId> drop_at;
    for (const auto &r : vehicle.onboard) {
        const Seconds pickup = vehicle.earliest_departure - r.elapsed_ride;
        onboard.emplace(r.request, Onboard{pickup, pickup + r.max_ride, r.riders});
        drop_at.emplace(r.request, r.dropoff);
    }
    int load = vehicle.load();
    if (load > vehicle.capacity) return std::nullopt;

    Seconds time = vehicle.earliest_departure;
    LocationId loc = vehicle.start_location;
    std::vector<RequestId> picked;
    for (const auto &spec : sequence) {
        if (spec.kind == StopKind::Pickup) {
            const Request *req = requests.find(spec.request);
            if (!req || onboard.count(spec.request) || drop_at.count(spec.request)) return std::nullopt;
            const Seconds arrive = time + tt(loc, req->origin);
            const Seconds at = std::max(arrive, req->earliest_pickup);
            load += req->riders;
            if (load > vehicle.capacity) return std::nullopt;
            onboard.emplace(req->id, Onboard{at, at + ctx.max_ride(*req), req->riders});
            drop_at.emplace(req->id, req->destination);
            route.cost += at - req->earliest_pickup;
            picked.push_back(req->id);
            route.stops.push_back({req->origin, StopKind::Pickup, req->id, at});
            time = at;
            loc = req->origin;
        } else {
            const auto it = onboard.find(spec.request);
            if (it == onboard.end()) return std::nullopt;
            const LocationId dest = drop_at.at(spec.request);
            const Seconds arrive = time + tt(loc, dest);
            if (arrive > it->second.deadline) return std::nullopt;
            load -= it->second.riders;
            onboard.erase(it);
            route.stops.push_back({dest, StopKind::Dropoff, spec.request, arrive});
            time = arrive;
            loc = dest;
        }
    }
    if (!onboard.empty()) return std::nullopt;
    std::sort(picked.begin(), picked.end());
    route.served = std::move(picked);
    return route;
}

std::vector<std::string> check_route(const Route &route, const VehicleSnapshot &vehicle, const RequestTable &requests,
                                     const RoutingContext &ctx) {
    std::vector<std::string> bad;
    const auto &tt = *ctx.travel;
    std::map<RequestId, std::pair<Seconds, Seconds>> onboard;  // id -> (pickup, max_ride)
    std::map<RequestId, int> riders;
    std::map<RequestId, LocationId> dest;
    for (const auto &r : vehicle.onboard) {
        onboard[r.request] = {vehicle.earliest_departure - r.elapsed_ride, r.max_ride};
        riders[r.request] = r.riders;
        dest[r.request] = r.dropoff;
    }
    int load = vehicle.load();
    Seconds time = vehicle.earliest_departure;
    LocationId loc = vehicle.start_location;
    Seconds cost = 0;
    std::vector<RequestId> served;
    for (std::size_t k = 0; k < route.stops.size(); ++k) {
        const auto &s = route.stops[k];
        if (s.time < time + tt(loc, s.location))
            bad.push_back(fmt::format("stop {} at t={} reached before {}", k, s.time, time + tt(loc, s.location)));
        if (s.kind == StopKind::Pickup) {
            const Request *req = requests.find(s.request);
            if (!req) {
                bad.push_back(fmt::format("stop {} picks up unknown request {}", k, s.request));
                continue;
            }
            if (s.location != req->origin) bad.push_back(fmt::format("stop {} pickup away from origin", k));
            if (s.time < req->earliest_pickup) bad.push_back(fmt::format("stop {} picks up before e_c", k));
            if (onboard.count(s.request)) bad.push_back(fmt::format("request {} picked up twice", s.request));
            onboard[s.request] = {s.time, ctx.max_ride(*req)};
            riders[s.request] = req->riders;
            dest[s.request] = req->destination;
            load += req->riders;
            cost += s.time - req->earliest_pickup;
            served.push_back(s.request);
        } else {
            const auto it = onboard.find(s.request);
            if (it == onboard.end()) {
                bad.push_back(fmt::format("stop {} drops request {} that is not onboard", k, s.request));
                continue;
            }
            if (s.location != dest[s.request]) bad.push_back(fmt::format("stop {} dropoff away from destination", k));
            if (s.time - it->second.first > it->second.second)
                bad.push_back(fmt::format("request {} rides {} s > max {} s", s.request, s.time - it->second.first,
                                          it->second.second));
            load -= riders[s.request];
            onboard.erase(it);
        }
        if (load > vehicle.capacity) bad.push_back(fmt::format("load {} exceeds capacity after stop {}", load, k));
        time = s.time;
        loc = s.location;
    }
    for (const auto &[id, _] : onboard) bad.push_back(fmt::format("request {} never dropped off", id));
    if (cost != route.cost) bad.push_back(fmt::format("route cost {} != recomputed {}", route.cost, cost));
    std::sort(served.begin(), served.end());
    if (served != route.served) bad.push_back("served set mismatch");
    return bad;
}

std::optional<Route> base_route(const VehicleSnapshot &vehicle, const RequestTable &requests,
                                const RoutingContext &ctx) {
    std::vector<RequestId> ids;
    for (const auto &r : vehicle.onboard) ids.push_back(r.request);
    std::sort(ids.begin(), ids.end());
    std::optional<Route> best;
    do {
        std::vector<StopSpec> seq;
        for (auto id : ids) seq.push_back({StopKind::Dropoff, id});
        auto r = build_route(vehicle, seq, requests, ctx);
        if (r && (!best || better_tie(*r, *best, vehicle.earliest_departure))) best = std::move(r);
    } while (std::next_permutation(ids.begin(), ids.end()));
    return best;
}

std::optional<Route> best_insertion(const VehicleSnapshot &vehicle, const Route &base, const Request &request,
                                    const RequestTable &requests, const RoutingContext &ctx) {
    const auto seq = specs_of(base);
    std::optional<Route> best;
    for (std::size_t i = 0; i <= seq.size(); ++i) {
        for (std::size_t j = i; j <= seq.size(); ++j) {
            std::vector<StopSpec> cand;
            cand.reserve(seq.size() + 2);
            cand.insert(cand.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(i));
            cand.push_back({StopKind::Pickup, request.id});
            cand.insert(cand.end(), seq.begin() + static_cast<std::ptrdiff_t>(i),
                        seq.begin() + static_cast<std::ptrdiff_t>(j));
            cand.push_back({StopKind::Dropoff, request.id});
            cand.insert(cand.end(), seq.begin() + static_cast<std::ptrdiff_t>(j), seq.end());
            auto r = build_route(vehicle, cand, requests, ctx);
            if (!r) continue;
            if (!best || r->cost < best->cost ||
                (r->cost == best->cost && better_tie(*r, *best, vehicle.earliest_departure)))
                best = std::move(r);
        }
    }
    return best;
}

}  // namespace rtrs
