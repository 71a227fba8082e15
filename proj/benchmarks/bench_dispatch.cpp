#include <random>

#include <benchmark/benchmark.h>

#include "rtrs/dispatch.hpp"
#include "rtrs/engine.hpp"
#include "rtrs/scenario.hpp"

using namespace rtrs;

namespace {

struct Epoch {
    Network net = build_grid(10, 10, 30, 2, 2, 300);
    std::vector<VehicleSnapshot> vehicles;
    std::vector<Request> requests;
};

Epoch random_epoch(int vehicles, int requests, std::uint64_t seed) {
    Epoch e;
    std::mt19937_64 rng(seed);
    const auto n = static_cast<LocationId>(e.net.location_count());
    for (int v = 0; v < vehicles; ++v) e.vehicles.push_back({v, static_cast<LocationId>(rng() % n), 3000, 4, {}});
    for (int r = 0; r < requests; ++r) {
        Request q;
        q.id = r;
        q.origin = static_cast<LocationId>(rng() % n);
        do q.destination = static_cast<LocationId>(rng() % n);
        while (q.destination == q.origin);
        q.request_time = q.earliest_pickup = 2970 + static_cast<Seconds>(rng() % 30);
        q.shortest_time = e.net.travel_time(q.origin, q.destination);
        q.arrival_epoch = 100;
        e.requests.push_back(q);
    }
    return e;
}

void BM_DispatchEpoch(benchmark::State &state) {
    const auto e = random_epoch(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 7);
    DispatchConfig cfg;
    RoutingContext ctx{&e.net.travel, 1.5, 240};
    for (auto _ : state) benchmark::DoNotOptimize(dispatch_epoch(e.vehicles, e.requests, 100, cfg, ctx));
}
BENCHMARK(BM_DispatchEpoch)->Args({5, 5})->Args({10, 10})->Args({20, 20})->Unit(benchmark::kMillisecond);

void BM_SimulateHour(benchmark::State &state) {
    const auto net = build_grid(10, 10, 30, 2, 2, 300);
    UniformScenario sc;
    sc.count = static_cast<int>(state.range(0));
    sc.duration = 3600;
    sc.seed = 3;
    const auto trips = uniform_trips(net, sc);
    SimConfig cfg;
    cfg.fleet_size = 20;
    for (auto _ : state) benchmark::DoNotOptimize(run(trips, net, cfg));
}
BENCHMARK(BM_SimulateHour)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
