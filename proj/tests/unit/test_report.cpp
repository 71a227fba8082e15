#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rtrs/report.hpp"

namespace fs = std::filesystem;
using namespace rtrs;

namespace {

RequestOutcome outcome(RequestId id, ZoneId zone, Seconds e_c, Seconds wait, Seconds ride = 120) {
    RequestOutcome o;
    o.request.id = id;
    o.request.request_time = o.request.earliest_pickup = e_c;
    o.request.origin = zone;
    o.request.destination = zone + 1;
    o.origin_zone = zone;
    o.destination_zone = zone;
    o.max_ride = 1000;
    o.vehicle = 0;
    o.pickup = e_c + wait;
    o.dropoff = o.pickup + ride;
    return o;
}

SimulationReport with_waits(const std::vector<Seconds> &waits, int zones = 2) {
    SimulationReport r;
    r.mode = "myopic";
    r.zone_count = zones;
    for (std::size_t i = 0; i < waits.size(); ++i)
        r.requests.push_back(outcome(static_cast<RequestId>(i), static_cast<ZoneId>(i % static_cast<std::size_t>(zones)),
                                     static_cast<Seconds>(i) * 10, waits[i]));
    return r;
}

}  // namespace

TEST_CASE("wait statistics") {
    const auto s = wait_stats({60, 120});
    CHECK(s.count == 2);
    CHECK(s.mean == doctest::Approx(90));
    CHECK(s.stddev == doctest::Approx(30));
    CHECK(s.p50 == doctest::Approx(90));
    CHECK(s.min == 60);
    CHECK(s.max == 120);

    const auto empty = wait_stats({});
    CHECK(empty.count == 0);
    CHECK(empty.mean == 0.0);
    CHECK(empty.stddev == 0.0);

    CHECK(percentile({1, 2, 3, 4, 5}, 0.9) == doctest::Approx(4.6));
    CHECK(percentile({7}, 0.99) == 7);
}

TEST_CASE("summary matches a recomputation from raw waits") {
    std::mt19937_64 rng(12);
    std::vector<Seconds> waits(300);
    for (auto &w : waits) w = static_cast<Seconds>(rng() % 900);
    const auto rep = with_waits(waits, 3);
    const auto s = summarize(rep);

    double sum = 0;
    for (auto w : waits) sum += static_cast<double>(w);
    const double mean = sum / 300.0;
    double ss = 0;
    for (auto w : waits) ss += (static_cast<double>(w) - mean) * (static_cast<double>(w) - mean);
    CHECK(s.waits.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(s.waits.stddev == doctest::Approx(std::sqrt(ss / 300.0)).epsilon(1e-9));

    std::size_t binned = 0;
    for (std::size_t b = 0; b < s.histogram.size(); ++b) {
        CHECK(s.histogram[b].lower == static_cast<Seconds>(b) * 30);
        CHECK(s.histogram[b].upper == static_cast<Seconds>(b + 1) * 30);
        binned += s.histogram[b].count;
    }
    CHECK(binned == 300);

    std::size_t zoned = 0;
    for (const auto &z : s.zones) {
        zoned += z.requests;
        double zsum = 0;
        std::size_t zn = 0;
        for (std::size_t i = 0; i < waits.size(); ++i)
            if (static_cast<ZoneId>(i % 3) == z.zone) zsum += static_cast<double>(waits[i]), ++zn;
        CHECK(z.mean_wait == doctest::Approx(zsum / static_cast<double>(zn)));
    }
    CHECK(zoned == 300);

    const auto none = summarize(SimulationReport{});
    CHECK(none.requests == 0);
    CHECK(none.waits.count == 0);
    CHECK(none.histogram.empty());
}

TEST_CASE("comparisons") {
    const auto a = with_waits({60, 120, 90, 30});
    const auto same = compare(a, a);
    REQUIRE(same.improvement_pct);
    CHECK(*same.improvement_pct == 0.0);
    for (const auto &z : same.zones) CHECK(z.improvement_pct.value_or(0.0) == 0.0);

    // about 3.63 vs 2.52 minutes
    const auto fast = with_waits({151, 151}, 1);
    const auto slow = with_waits({218, 218}, 1);
    const auto c = compare(fast, slow);
    REQUIRE(c.improvement_pct);
    CHECK(*c.improvement_pct == doctest::Approx(100.0 * (218.0 - 151.0) / 218.0));
    CHECK(100.0 * (3.64 - 2.51) / 3.64 == doctest::Approx(31.0).epsilon(0.002));

    auto sparse = with_waits({60, 60}, 3);  // zone 2 never sees a request
    const auto cz = compare(sparse, sparse);
    REQUIRE(cz.zones.size() == 3);
    CHECK_FALSE(cz.zones[2].improvement_pct.has_value());

    CHECK_THROWS_AS(compare(a, with_waits({60})), std::invalid_argument);
    auto moved = a;
    moved.requests[1].request.origin = 99;
    CHECK_THROWS_AS(compare(a, moved), std::invalid_argument);

    CHECK(size_bucket(39'999, {40'000, 50'000}) == "<40000");
    CHECK(size_bucket(40'000, {40'000, 50'000}) == "40000-49999");
    CHECK(size_bucket(50'000, {40'000, 50'000}) == ">=50000");
}

TEST_CASE("reports survive a write and reload") {
    auto rep = with_waits({10, 400, 35, 61});
    rep.seed = 9;
    rep.start = 0;
    rep.end = 900;
    rep.vehicles = {{0, 3, 500, 300, 100, 1, 2}, {1, 7, 900, 0, 0, 0, 0}};
    rep.occupancy = {{0, 1, 2}, {30, 2, 3}};
    rep.violations = {"example violation"};
    EpochRecord e;
    e.epoch = 1;
    e.lp_trace = {10.5, 9.25};
    rep.epochs.push_back(e);

    const auto dir = fs::temp_directory_path() / "rtrs_report_rt";
    fs::remove_all(dir);
    write_report(rep, dir);
    for (const char *f : {"requests.csv", "vehicles.csv", "epochs.csv", "occupancy.csv", "relocations.csv",
                          "meta.json", "summary.json", "zones.csv"})
        CHECK(fs::exists(dir / f));

    std::ifstream meta(dir / "meta.json");
    const auto j = nlohmann::json::parse(meta);
    CHECK(j.at("schema_version") == kReportSchemaVersion);

    const auto back = load_report(dir);
    CHECK(back.mode == rep.mode);
    CHECK(back.seed == 9);
    REQUIRE(back.requests.size() == rep.requests.size());
    for (std::size_t i = 0; i < rep.requests.size(); ++i) {
        CHECK(back.requests[i].pickup == rep.requests[i].pickup);
        CHECK(back.requests[i].dropoff == rep.requests[i].dropoff);
        CHECK(back.requests[i].origin_zone == rep.requests[i].origin_zone);
    }
    CHECK(back.vehicles.size() == 2);
    CHECK(back.violations.size() == 1);
    const auto s1 = summarize(rep), s2 = summarize(back);
    CHECK(s1.waits.mean == s2.waits.mean);
    CHECK(s1.mean_riders_per_occupied == doctest::Approx(s2.mean_riders_per_occupied));
    CHECK(summary_json(s1) == summary_json(s2));
    CHECK(nlohmann::json::parse(comparison_json(compare(rep, back))).contains("improvement_pct"));
}
