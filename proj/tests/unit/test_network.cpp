#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "rtrs/network.hpp"

namespace fs = std::filesystem;
using namespace rtrs;

namespace {

fs::path write_tmp(const std::string &name, const std::string &body) {
    const auto p = fs::temp_directory_path() / ("rtrs_net_" + name);
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("degenerate 1x1 grid") {
    const auto n = build_grid(1, 1, 60, 1, 1, 300);
    CHECK(n.location_count() == 1);
    CHECK(n.travel_time(0, 0) == 0);
    CHECK(n.zones.zone_count() == 1);
    CHECK(n.zones.adjacency[0].empty());
}

TEST_CASE("grid travel is Manhattan distance") {
    const auto n = build_grid(2, 2, 60, 1, 1, 300);
    CHECK(n.travel_time(0, 3) == 120);
    CHECK(n.travel_time(1, 2) == 120);
    CHECK(n.travel_time(0, 1) == 60);

    const auto big = build_grid(5, 7, 45, 1, 1, 300);
    for (LocationId a = 0; a < 35; ++a)
        for (LocationId b = 0; b < 35; ++b) {
            const int dr = std::abs(a / 7 - b / 7), dc = std::abs(a % 7 - b % 7);
            CHECK(big.travel_time(a, b) == 45 * (dr + dc));
            CHECK(big.travel_time(a, b) == big.travel_time(b, a));
        }
    CHECK(big.travel.triangle_violations().empty());
}

TEST_CASE("4x4 grid with 2x2 zones") {
    const auto n = build_grid(4, 4, 60, 2, 2, 300);
    REQUIRE(n.zones.zone_count() == 4);
    for (const auto &m : n.zones.members) CHECK(m.size() == 4);
    CHECK(n.zone_of(0) == 0);
    CHECK(n.zone_of(3) == 1);
    CHECK(n.zone_of(12) == 2);
    CHECK(n.zone_of(15) == 3);
    CHECK(n.zones.adjacency[0] == std::vector<ZoneId>{1, 2});
    CHECK(n.zones.adjacency[3] == std::vector<ZoneId>{1, 2});
    for (int i = 0; i < 4; ++i) {
        CHECK(n.zones.tt_periods[i][i] == 0);
        for (ZoneId j : n.zones.adjacency[i]) {
            const auto &back = n.zones.adjacency[static_cast<std::size_t>(j)];
            CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
    }
    // centroids two cells apart: 120 s -> 1 period; diagonal 240 s -> 1 period
    CHECK(n.zones.tt_periods[0][1] == 1);
    CHECK(n.zones.tt_periods[0][3] == 1);
    const auto slow = build_grid(4, 4, 200, 2, 2, 300);
    CHECK(slow.zones.tt_periods[0][1] == 2);  // 400 s
    CHECK(slow.zones.tt_periods[0][3] == 3);  // 800 s
}

TEST_CASE("zone grid must divide the location grid") {
    CHECK_THROWS_AS(build_grid(5, 4, 60, 2, 2, 300), ConfigError);
    CHECK_THROWS_AS(build_grid(0, 4, 60, 1, 1, 300), ConfigError);
}

TEST_CASE("closest stop in a zone breaks ties toward the smaller id") {
    const auto n = build_grid(4, 4, 60, 2, 2, 300);
    // from location 0, zone 3 members are 10, 11, 14, 15; 10 is closest
    CHECK(n.closest_in_zone(0, 3) == 10);
    // from location 5 (1,1), zone 1 = {2,3,6,7}: 6 at 60 s; zone 2 = {8,9,12,13}: 9 at 60 s
    CHECK(n.closest_in_zone(5, 1) == 6);
    CHECK(n.closest_in_zone(5, 2) == 9);
    const auto cols = build_grid(2, 2, 60, 1, 2, 300);
    CHECK(cols.closest_in_zone(0, 1) == 1);
    CHECK(cols.closest_in_zone(2, 1) == 3);
}

TEST_CASE("matrix loading") {
    CHECK(load_travel_matrix(write_tmp("one.csv", "0\n")).size() == 1);
    const auto m = load_travel_matrix(write_tmp("two.csv", "0,30\n30,0\n"));
    CHECK(m(0, 1) == 30);
    CHECK(m(1, 0) == 30);

    try {
        load_travel_matrix(write_tmp("neg.csv", "0,30\n-5,0\n"));
        FAIL("negative entry accepted");
    } catch (const ParseError &e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(load_travel_matrix(write_tmp("abc.csv", "0,x\n1,0\n")), ParseError);
    CHECK_THROWS_AS(load_travel_matrix(write_tmp("ragged.csv", "0,1,2\n1,0\n2,1,0\n")), ParseError);
    CHECK_THROWS_AS(load_travel_matrix(write_tmp("rect.csv", "0,1\n1,0\n2,2\n")), ParseError);
    CHECK_THROWS_AS(load_travel_matrix(write_tmp("diag.csv", "5,1\n1,0\n")), ParseError);

    std::vector<std::string> warnings;
    const auto tri = load_travel_matrix(write_tmp("tri.csv", "0,1,10\n1,0,1\n10,1,0\n"), &warnings);
    CHECK(tri(0, 2) == 10);
    CHECK(!warnings.empty());
}

TEST_CASE("loaded network with zone file") {
    const auto mat = write_tmp("mat4.csv", "0,60,60,120\n60,0,120,60\n60,120,0,60\n120,60,60,0\n");
    const auto zones = write_tmp("zones4.csv", "0,0\n1,0\n2,1\n3,1\n");
    const auto n = load_network(mat, zones, 300);
    CHECK(n.location_count() == 4);
    CHECK(n.zones.zone_count() == 2);
    CHECK(n.zones.adjacency[0] == std::vector<ZoneId>{1});
    CHECK(n.zones.tt_periods[0][1] == 1);
    std::size_t total = 0;
    for (const auto &m : n.zones.members) total += m.size();
    CHECK(total == 4);

    // location 0 reaches both 1 and 2 in 60 s
    const auto tie = load_network(mat, write_tmp("ztie.csv", "0,0\n1,1\n2,1\n3,0\n"), 300);
    CHECK(tie.closest_in_zone(0, 1) == 1);
    CHECK(tie.closest_in_zone(3, 1) == 1);

    CHECK_THROWS_AS(load_network(mat, write_tmp("zbad.csv", "0,0\n1,0\n2,3\n3,1\n"), 300), ParseError);
}
