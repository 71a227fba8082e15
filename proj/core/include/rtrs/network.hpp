#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rtrs/types.hpp"

namespace rtrs {

struct GridCell {
    int row = 0;
    int col = 0;
};

struct Location {
    LocationId id = 0;
    GridCell cell;
};

/// Dense L x L travel times in whole seconds.
class TravelTimeMatrix {
public:
    TravelTimeMatrix() = default;
    explicit TravelTimeMatrix(std::size_t n) : n_(n), seconds_(n * n, 0) {}

    std::size_t size() const noexcept { return n_; }
    Seconds operator()(LocationId from, LocationId to) const {
        return seconds_[static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to)];
    }
    Seconds &at(LocationId from, LocationId to) {
        return seconds_[static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to)];
    }

    /// Triples (a, b, c) with t(a,c) > t(a,b) + t(b,c); capped at `limit` entries.
    std::vector<std::string> triangle_violations(std::size_t limit = 16) const;
    Seconds min_positive() const;

private:
    std::size_t n_ = 0;
    std::vector<Seconds> seconds_;
};

struct ZoneMap {
    std::vector<ZoneId> zone_of;                 // per location
    std::vector<std::vector<LocationId>> members;  // per zone, ascending ids
    std::vector<std::vector<ZoneId>> adjacency;    // per zone, ascending, symmetric, irreflexive
    std::vector<std::vector<int>> tt_periods;      // Z x Z, whole relocation periods

    int zone_count() const noexcept { return static_cast<int>(members.size()); }
};

struct Network {
    std::vector<Location> locations;
    TravelTimeMatrix travel;
    ZoneMap zones;

    std::size_t location_count() const noexcept { return locations.size(); }
    Seconds travel_time(LocationId a, LocationId b) const { return travel(a, b); }
    ZoneId zone_of(LocationId loc) const { return zones.zone_of[static_cast<std::size_t>(loc)]; }

    /// Closest location of `zone` from `from` (ties to the smaller id).
    LocationId closest_in_zone(LocationId from, ZoneId zone) const;
};

/// Synthetic Manhattan grid with rectangular zone blocks. Location id is
/// row * cols + col.
Network build_grid(int rows, int cols, Seconds cell_seconds, int zone_rows, int zone_cols,
                   Seconds relocation_period_s);

/// Comma-separated rows of non-negative integer seconds. Triangle-inequality
/// violations are appended to `warnings` instead of failing the load.
TravelTimeMatrix load_travel_matrix(const std::filesystem::path &path,
                                    std::vector<std::string> *warnings = nullptr);

/// "location_id,zone_id" per line; zone ids must be dense 0..Z-1.
std::vector<ZoneId> load_zone_assignment(const std::filesystem::path &path,
                                         std::size_t location_count);

/// Zone structure for an arbitrary matrix. Zones are adjacent when their
/// closest location pair is within the smallest positive travel time, and
/// tt is measured between zone medoids.
ZoneMap build_zone_map(const TravelTimeMatrix &travel, std::vector<ZoneId> zone_of,
                       Seconds relocation_period_s);

Network load_network(const std::filesystem::path &matrix_path,
                     const std::filesystem::path &zones_path, Seconds relocation_period_s,
                     std::vector<std::string> *warnings = nullptr);

}  // namespace rtrs
