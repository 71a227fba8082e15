#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "rtrs/forecast.hpp"

using namespace rtrs;

namespace {

// One period per day, so a week is 7 periods.
DemandSeries daily_series(std::vector<std::vector<int>> counts) {
    DemandSeries s;
    s.period_seconds = 86400;
    s.periods_per_day = 1;
    const auto z = counts.size();
    s.counts = std::move(counts);
    s.destination_counts.assign(z, std::vector<std::vector<int>>(kHourClasses, std::vector<int>(z, 0)));
    return s;
}

const std::vector<std::vector<ZoneId>> kPair{{1}, {0}};

}  // namespace

TEST_CASE("weekly differencing") {
    std::vector<int> periodic;
    for (int t = 0; t < 30; ++t) periodic.push_back(t % 7 + 1);
    const auto d = difference_weekly(daily_series({periodic, std::vector<int>(30, 4)}));
    CHECK(d.valid_from == 7);
    for (int t = 7; t < 30; ++t) {
        CHECK(d.values[0][static_cast<std::size_t>(t)] == 0.0);
        CHECK(d.values[1][static_cast<std::size_t>(t)] == 0.0);
    }

    std::vector<int> bump(14, 5);
    bump[10] = 8;
    CHECK(difference_weekly(daily_series({bump})).values[0][10] == 3.0);

    std::mt19937_64 rng(5);
    std::vector<int> noisy(40);
    for (auto &x : noisy) x = static_cast<int>(rng() % 9);
    const auto series = daily_series({noisy});
    const auto nd = difference_weekly(series);
    for (int t = 7; t < 40; ++t)
        CHECK(noisy[static_cast<std::size_t>(t - 7)] + nd.values[0][static_cast<std::size_t>(t)] ==
              noisy[static_cast<std::size_t>(t)]);

    CHECK_THROWS_AS(difference_weekly(daily_series({std::vector<int>(7, 1)})), ForecastUnavailable);
}

TEST_CASE("VAR(1) coefficients are recovered") {
    const std::vector<std::vector<double>> phi{{0.5, 0.2}, {-0.3, 0.4}};
    int first_order = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto diff = oracle::simulate_var1(phi, kPair, 3000, 1e-3, seed);
        for (ZoneId z = 0; z < 2; ++z) {
            const auto m = fit_var(diff, z, kPair, 4);
            CHECK(m.dimension() == 2);
            CHECK(m.neighbor_order[0] == z);
            CHECK(m.noise_variance < 1.1e-6);
            for (std::size_t e = 0; e < 2; ++e)
                CHECK(std::abs(m.coefficients[0][e] - phi[static_cast<std::size_t>(z)][e]) < 0.05);
            first_order += m.order == 1;
        }
    }
    // AIC overfits a true VAR(1) roughly one time in five
    CHECK(first_order >= 26);
}

TEST_CASE("all-zero series selects k = 1 with zero coefficients") {
    DifferencedSeries d;
    d.week_periods = 7;
    d.valid_from = 7;
    d.values.assign(2, std::vector<double>(200, 0.0));
    const auto m = fit_var(d, 0, kPair, 4);
    CHECK(m.order == 1);
    for (double c : m.coefficients[0]) CHECK(c == 0.0);

    d.values.assign(2, std::vector<double>(30, 0.0));
    CHECK_THROWS_AS(fit_var(d, 0, kPair, 8), ForecastUnavailable);
}

TEST_CASE("white noise: small lag-1 coefficients on average") {
    const std::vector<std::vector<double>> phi{{0.0, 0.0}, {0.0, 0.0}};
    double mean = 0.0;
    int small_k = 0;
    for (int seed = 0; seed < 50; ++seed) {
        const auto diff = oracle::simulate_var1(phi, kPair, 400, 1.0, 100 + static_cast<std::uint64_t>(seed));
        const auto m = fit_var(diff, 0, kPair, 4);
        mean += m.coefficients[0][0];
        small_k += m.order == 1;
    }
    mean /= 50;
    CHECK(std::abs(mean) < 0.05);
    CHECK(small_k >= 35);
}

TEST_CASE("rank-deficient design falls back to minimum norm") {
    // zone 1 copies zone 0, so the two regressors are collinear
    const auto base = oracle::simulate_var1({{0.6, 0.0}, {0.6, 0.0}}, kPair, 500, 1.0, 9);
    DifferencedSeries d = base;
    d.values[1] = d.values[0];
    const auto m = fit_var(d, 0, kPair, 2);
    for (const auto &row : m.coefficients)
        for (double c : row) CHECK(std::isfinite(c));
    CHECK(m.coefficients[0][0] == doctest::Approx(m.coefficients[0][1]).epsilon(1e-6));
    CHECK(m.coefficients[0][0] + m.coefficients[0][1] == doctest::Approx(0.6).epsilon(0.1));
}

TEST_CASE("zone predictions") {
    std::vector<int> z0(14, 2), z1(14, 1);
    z0[12] = 4;  // delta at 12 is 2
    z1[12] = 2;  // delta at 12 is 1
    const auto series = daily_series({z0, z1});
    const auto diff = difference_weekly(series);

    VarModel m;
    m.zone = 0;
    m.neighbor_order = {0, 1};
    m.order = 1;
    m.coefficients = {{0.0, 0.0}};
    CHECK(predict_zone(m, diff, series, 13) == doctest::Approx(2.0));

    m.coefficients = {{0.5, 0.25}};
    // 0.5 * 2 + 0.25 * 1 on top of last week's 2
    CHECK(predict_delta(m, diff, 13) == doctest::Approx(1.25));
    CHECK(predict_zone(m, diff, series, 13) == doctest::Approx(3.25));

    m.coefficients = {{-2.5, 0.0}};
    CHECK(predict_zone(m, diff, series, 13) == doctest::Approx(0.0));

    m.order = 2;
    m.coefficients = {{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(predict_delta(m, diff, 8), ForecastUnavailable);
}

TEST_CASE("destination assignment rounds per pair") {
    const auto n = build_grid(1, 3, 60, 1, 3, 300);
    std::vector<TripRecord> trips;
    for (int i = 0; i < 7; ++i) trips.push_back({i, 1, 0, 1});
    for (int i = 0; i < 3; ++i) trips.push_back({10 + i, 1, 0, 2});
    for (int i = 0; i < 2; ++i) trips.push_back({20 + i, 1, 1, 0});
    for (int i = 0; i < 3; ++i) trips.push_back({30 + i, 1, 1, 2});
    const auto hist = aggregate_history(trips, n.zones, 300, 4);

    std::vector<double> lambda{10.0, 0.0, 5.0};
    auto out = assign_destinations(lambda, hist, 0);
    CHECK(out[0] == std::vector<int>{0, 7, 3});
    CHECK(out[1] == std::vector<int>{0, 0, 0});
    CHECK(out[2] == std::vector<int>{0, 0, 0});  // no history

    lambda = {0.0, 1.0, 0.0};  // shares 0.4 / 0.6
    out = assign_destinations(lambda, hist, 0);
    CHECK(out[1] == std::vector<int>{0, 0, 1});

    lambda = {0.0, 2.5, 0.0};  // 1.0 and 1.5 -> 1, 2
    out = assign_destinations(lambda, hist, 0);
    CHECK(out[1] == std::vector<int>{1, 0, 2});
    CHECK(assign_destinations(lambda, hist, 5)[1] == std::vector<int>{0, 0, 0});
}

TEST_CASE("oracle forecast counts future trips") {
    const auto n = build_grid(2, 2, 60, 2, 2, 300);
    const std::vector<TripRecord> trips{{100, 1, 0, 1}, {200, 1, 0, 1}, {299, 6, 0, 1}, {300, 1, 2, 3}, {350, 1, 3, 2}};
    const auto first = oracle_forecast(trips, 0, 300, n.zones, 4);
    CHECK(first[0][1] == 4);
    int total = 0;
    for (const auto &row : first)
        for (int c : row) total += c;
    CHECK(total == 4);
    const auto second = oracle_forecast(trips, 300, 300, n.zones, 4);
    CHECK(second[2][3] == 1);
    CHECK(second[3][2] == 1);
    for (const auto &row : oracle_forecast(trips, 600, 300, n.zones, 4))
        for (int c : row) CHECK(c == 0);
}

TEST_CASE("forecaster fit, multi-step prediction and model files") {
    const auto n = build_grid(2, 2, 60, 2, 2, 300);
    std::mt19937_64 rng(21);
    std::vector<TripRecord> trips;
    const Seconds days = 9;
    for (Seconds t = 0; t < days * 86400; t += 300) {
        const int k = static_cast<int>(rng() % 3);
        for (int i = 0; i < k; ++i) {
            const auto o = static_cast<LocationId>(rng() % 4);
            trips.push_back({t + i, 1, o, static_cast<LocationId>((o + 1) % 4)});
        }
    }
    const auto hist = aggregate_history(trips, n.zones, 300, 4);

    ForecastOptions opt;
    opt.k_max = 3;
    DemandForecaster f(opt, n.zones, {});
    CHECK_FALSE(f.fitted());
    CHECK_THROWS_AS(f.predict(hist, 100, 3), ForecastUnavailable);
    f.fit(hist);
    REQUIRE(f.fitted());
    CHECK(f.models().size() == 4);

    const int start = hist.period_count();
    const auto zf = f.zone_forecast(hist, start, 6);
    REQUIRE(zf.size() == 4);
    for (const auto &row : zf) {
        CHECK(row.size() == 6);
        for (double v : row) CHECK(v >= 0.0);
    }
    const auto lam = f.predict(hist, start, 6);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (int c : lam[i][j]) CHECK(c >= 0);

    const auto dir = std::filesystem::temp_directory_path() / "rtrs_models";
    std::filesystem::remove_all(dir);
    save_models(dir, f.models());
    const auto loaded = load_models(dir);
    REQUIRE(loaded.size() == 4);
    for (std::size_t z = 0; z < 4; ++z) {
        CHECK(loaded[z].order == f.models()[z].order);
        CHECK(loaded[z].neighbor_order == f.models()[z].neighbor_order);
        for (std::size_t k = 0; k < loaded[z].coefficients.size(); ++k)
            for (std::size_t e = 0; e < loaded[z].coefficients[k].size(); ++e)
                CHECK(loaded[z].coefficients[k][e] == doctest::Approx(f.models()[z].coefficients[k][e]));
    }

    DemandForecaster short_history(opt, n.zones, {});
    const std::vector<TripRecord> few(trips.begin(), trips.begin() + 10);
    CHECK_THROWS_AS(short_history.fit(aggregate_history(few, n.zones, 300, 4)), ForecastUnavailable);

    const auto coarse = coarsen(hist, 12);
    CHECK(coarse.period_count() == hist.period_count() / 12);
    CHECK(coarse.periods_per_day == 24);
}
