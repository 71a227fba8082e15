#pragma once

#include <cstdint>
#include <vector>

#include "rtrs/demand.hpp"
#include "rtrs/network.hpp"

namespace rtrs {

struct UniformScenario {
    int count = 100;
    Seconds start = 0;
    Seconds duration = 3600;
    int max_passengers = 1;
    std::uint64_t seed = 0;
};

/// `count` trips with uniform request times in [start, start + duration) and
/// uniform distinct origin/destination locations. Sorted by request time.
std::vector<TripRecord> uniform_trips(const Network &network, const UniformScenario &scenario);

/// Demand concentrated in one zone at a time; the hot zone advances every
/// `rotation_s` and the pattern repeats daily, so it is weekly periodic.
struct HotZoneScenario {
    Seconds start = 0;
    Seconds end = 86'400;
    Seconds rotation_s = 1800;
    double hot_rate_per_hour = 60.0;   // extra requests from the hot zone
    double base_rate_per_hour = 10.0;  // per zone, always on
    std::vector<int> passenger_weights{7, 2, 1};  // P(1), P(2), ...
    std::uint64_t seed = 0;
};

ZoneId hot_zone_at(Seconds t, int zone_count, Seconds rotation_s);

std::vector<TripRecord> hot_zone_trips(const Network &network, const HotZoneScenario &scenario);

}  // namespace rtrs
