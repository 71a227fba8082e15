#include <random>

#include <benchmark/benchmark.h>

#include "rtrs/relocate.hpp"
#include "rtrs/simplex.hpp"

using namespace rtrs;

namespace {

// Random feasible LP: rows built around a known nonnegative point.
lp::Problem random_lp(int m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    lp::Problem p;
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (auto &x : x0) x = u(rng);
    for (int j = 0; j < n; ++j) p.add_variable(u(rng), 0.0, 2.0);
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<int, double>> row;
        double b = 0.0;
        for (int j = 0; j < n; ++j)
            if (u(rng) < 0.3) {
                const double a = u(rng) * 2.0 - 1.0;
                row.emplace_back(j, a);
                b += a * x0[static_cast<std::size_t>(j)];
            }
        p.add_row(std::move(row), b);
    }
    return p;
}

void BM_Simplex(benchmark::State &state) {
    const auto n = static_cast<int>(state.range(0));
    const auto p = random_lp(n / 2, n, 11);
    for (auto _ : state) benchmark::DoNotOptimize(lp::solve(p));
}
BENCHMARK(BM_Simplex)->Arg(40)->Arg(120)->Arg(300)->Unit(benchmark::kMillisecond);

MpcInput random_mpc(int Z, int T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MpcInput in;
    in.horizon = T;
    const auto z = static_cast<std::size_t>(Z), t = static_cast<std::size_t>(T);
    in.demand.assign(z, std::vector<std::vector<double>>(z, std::vector<double>(t, 0.0)));
    for (auto &a : in.demand)
        for (auto &b : a)
            for (auto &c : b) c = static_cast<double>(rng() % 3);
    in.sharing.assign(z, std::vector<double>(z, 1.2));
    in.available.assign(z, std::vector<int>(t, 0));
    for (auto &row : in.available) row[0] = static_cast<int>(rng() % 4);
    in.tt.assign(z, std::vector<int>(z, 1));
    for (std::size_t i = 0; i < z; ++i) in.tt[i][i] = 0;
    return in;
}

void BM_Mpc(benchmark::State &state) {
    const auto in = random_mpc(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(solve_mpc(in));
}
BENCHMARK(BM_Mpc)->Args({4, 3})->Args({9, 4})->Unit(benchmark::kMillisecond);

}  // namespace
