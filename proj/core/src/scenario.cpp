#include <algorithm>
#include <random>
#include <stdexcept>

#include "rtrs/scenario.hpp"

namespace rtrs {

namespace {

LocationId other_location(std::mt19937_64 &rng, LocationId origin, std::size_t count) {
    std::uniform_int_distribution<LocationId> pick(0, static_cast<LocationId>(count) - 2);
    const auto d = pick(rng);
    return d >= origin ? d + 1 : d;
}

}  // namespace

std::vector<TripRecord> uniform_trips(const Network &network, const UniformScenario &sc) {
    const auto L = network.location_count();
    if (L < 2) throw std::invalid_argument("need at least two locations");
    if (sc.duration <= 0 || sc.count < 0 || sc.max_passengers < 1) throw std::invalid_argument("bad scenario");
    std::mt19937_64 rng(sc.seed);
    std::uniform_int_distribution<Seconds> when(sc.start, sc.start + sc.duration - 1);
    std::uniform_int_distribution<LocationId> where(0, static_cast<LocationId>(L) - 1);
    std::uniform_int_distribution<int> party(1, sc.max_passengers);
    std::vector<TripRecord> trips;
    trips.reserve(static_cast<std::size_t>(sc.count));
    for (int i = 0; i < sc.count; ++i) {
        TripRecord t;
        t.request_time = when(rng);
        t.origin = where(rng);
        t.destination = other_location(rng, t.origin, L);
        t.passengers = party(rng);
        trips.push_back(t);
    }
    std::stable_sort(trips.begin(), trips.end(),
                     [](const TripRecord &a, const TripRecord &b) { return a.request_time < b.request_time; });
    return trips;
}

ZoneId hot_zone_at(Seconds t, int zone_count, Seconds rotation_s) {
    const Seconds within_day = ((t % 86'400) + 86'400) % 86'400;
    return static_cast<ZoneId>((within_day / rotation_s) % zone_count);
}

std::vector<TripRecord> hot_zone_trips(const Network &network, const HotZoneScenario &sc) {
    const auto L = network.location_count();
    const int Z = network.zones.zone_count();
    if (L < 2 || Z < 1) throw std::invalid_argument("network too small");
    if (sc.rotation_s <= 0 || sc.end <= sc.start) throw std::invalid_argument("bad scenario window");
    std::mt19937_64 rng(sc.seed);
    std::discrete_distribution<int> party(sc.passenger_weights.begin(), sc.passenger_weights.end());
    std::vector<TripRecord> trips;

    const Seconds slot = sc.rotation_s;
    for (Seconds lo = sc.start - ((sc.start % slot) + slot) % slot; lo < sc.end; lo += slot) {
        const Seconds a = std::max(lo, sc.start);
        const Seconds b = std::min(lo + slot, sc.end);
        const double hours = static_cast<double>(b - a) / 3600.0;
        const ZoneId hot = hot_zone_at(lo, Z, slot);
        for (ZoneId z = 0; z < Z; ++z) {
            const double rate = sc.base_rate_per_hour + (z == hot ? sc.hot_rate_per_hour : 0.0);
            std::poisson_distribution<int> arrivals(rate * hours);
            const int n = rate > 0.0 ? arrivals(rng) : 0;
            const auto &members = network.zones.members[static_cast<std::size_t>(z)];
            std::uniform_int_distribution<Seconds> when(a, b - 1);
            std::uniform_int_distribution<std::size_t> member(0, members.size() - 1);
            for (int k = 0; k < n; ++k) {
                TripRecord t;
                t.request_time = when(rng);
                t.origin = members[member(rng)];
                t.destination = other_location(rng, t.origin, L);
                t.passengers = party(rng) + 1;
                trips.push_back(t);
            }
        }
    }
    std::stable_sort(trips.begin(), trips.end(),
                     [](const TripRecord &x, const TripRecord &y) { return x.request_time < y.request_time; });
    return trips;
}

}  // namespace rtrs
