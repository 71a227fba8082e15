#include <doctest.h>

#include <sstream>

#include "rtrs/engine.hpp"

using namespace rtrs;

TEST_CASE("defaults") {
    const SimConfig c;
    CHECK(c.epoch_seconds == 30);
    CHECK(c.relocation_period_s == 300);
    CHECK(c.omega == 10);
    CHECK(c.capacity == 4);
    CHECK(c.alpha == 1.5);
    CHECK(c.beta == 240);
    CHECK(c.rho == 420.0);
    CHECK(c.sharing_ratio == 1.2);
    CHECK(c.horizon == 6);
    CHECK(c.max_stops == 8);
    CHECK(c.forecast_k_max == 8);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing key=value files") {
    std::istringstream in(
        "# desk scale\n"
        "fleet_size = 12\n"
        "mode=oracle\n"
        "\n"
        "sharing_mode=online   # measured\n"
        "freeze_scheduled=yes\n"
        "forecast_granularity=hourly\n"
        "alpha=1.75\n");
    const auto c = parse_config(in);
    CHECK(c.fleet_size == 12);
    CHECK(c.mode == Mode::Oracle);
    CHECK(c.sharing_mode == SharingMode::Online);
    CHECK(c.freeze_scheduled);
    CHECK(c.forecast_granularity == ForecastGranularity::Hourly);
    CHECK(c.alpha == 1.75);
    CHECK(c.capacity == 4);

    std::istringstream again(format_config(c));
    const auto d = parse_config(again);
    CHECK(format_config(d) == format_config(c));
}

TEST_CASE("bad configuration is rejected") {
    std::istringstream unknown("fleet=3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream no_eq("fleet_size 3\n");
    CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
    std::istringstream junk("capacity=four\n");
    CHECK_THROWS_AS(parse_config(junk), ConfigError);
    std::istringstream flag("close_gap=maybe\n");
    CHECK_THROWS_AS(parse_config(flag), ConfigError);

    SimConfig c;
    CHECK_THROWS_AS(set_config_value(c, "mode", "psychic"), ConfigError);
    c.relocation_period_s = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_stops = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.alpha = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("dispatch and routing views") {
    SimConfig c;
    c.rho = 300;
    c.max_stops = 6;
    const auto d = c.dispatch();
    CHECK(d.rho == 300);
    CHECK(d.max_stops == 6);
    CHECK(d.epoch_seconds == 30);
    TravelTimeMatrix tt(2);
    const auto r = c.routing(tt);
    CHECK(r.travel == &tt);
    CHECK(r.beta == 240);
}
