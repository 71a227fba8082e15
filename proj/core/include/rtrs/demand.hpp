#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtrs/network.hpp"
#include "rtrs/types.hpp"

namespace rtrs {

struct TripRecord {
    Seconds request_time = 0;
    int passengers = 1;
    LocationId origin = 0;
    LocationId destination = 0;

    friend bool operator==(const TripRecord &, const TripRecord &) = default;
};

struct Request {
    RequestId id = -1;
    Seconds request_time = 0;
    Seconds earliest_pickup = 0;  // e_c
    int riders = 1;
    LocationId origin = 0;
    LocationId destination = 0;
    Seconds shortest_time = 0;  // t_c
    int arrival_epoch = 0;
};

/// Maximum ride time max{alpha * t_c, beta + t_c}, floored to whole seconds.
Seconds max_ride_seconds(Seconds shortest_time, double alpha, Seconds beta);

/// Splits a party larger than `capacity` into ceil(passengers / capacity)
/// requests, filling each to capacity except possibly the last. Ids are
/// assigned consecutively from `first_id`.
std::vector<Request> split_request(const TripRecord &trip, int capacity, const TravelTimeMatrix &travel,
                                   RequestId first_id = 0);

/// Validates and splits a trip log. Trips must be sorted by request_time;
/// zero-length trips (origin == destination) are dropped with a warning.
std::vector<Request> build_requests(std::span<const TripRecord> trips, int capacity, const TravelTimeMatrix &travel,
                                    std::vector<std::string> *warnings = nullptr);

/// Requests with request_time in [(epoch-1) * epoch_len, epoch * epoch_len),
/// tagged with arrival_epoch = epoch. Throws IngestionError on unsorted input.
std::vector<Request> batch_requests(std::span<const Request> stream, int epoch, Seconds epoch_len);

/// Streaming form of batch_requests for consecutive epochs.
class EpochBatcher {
public:
    EpochBatcher(std::span<const Request> stream, Seconds epoch_len);
    std::vector<Request> next(int epoch);
    bool exhausted() const noexcept { return cursor_ >= stream_.size(); }

private:
    std::span<const Request> stream_;
    Seconds epoch_len_;
    std::size_t cursor_ = 0;
};

/// Calendar alignment of the simulation clock. Time 0 is Monday 00:00 plus
/// `offset_s`.
struct Calendar {
    Seconds offset_s = 0;
};

inline constexpr int kHourClasses = 48;

/// (is_weekend, hour_of_day) packed as is_weekend * 24 + hour.
int hour_class(Seconds t, const Calendar &cal);

struct DemandSeries {
    Seconds period_seconds = 300;
    int periods_per_day = 288;
    std::vector<std::vector<int>> counts;  // zone x period
    // destination_counts[zone][hour_class][dest_zone]
    std::vector<std::vector<std::vector<int>>> destination_counts;

    int zone_count() const noexcept { return static_cast<int>(counts.size()); }
    int period_count() const noexcept { return counts.empty() ? 0 : static_cast<int>(counts.front().size()); }
    int week_periods() const noexcept { return periods_per_day * 7; }

    /// Empirical destination distribution; empty when the zone has no history
    /// in that hour class.
    std::vector<std::pair<ZoneId, double>> destination_shares(ZoneId zone, int hclass) const;

    void extend_to(int periods);
    void add(const Request &req, const ZoneMap &zones, const Calendar &cal);
};

DemandSeries empty_series(int zone_count, Seconds period_seconds);

/// Per-zone request counts for each period of length `period_seconds`
/// (post-splitting) plus hour-class destination histograms. `periods` fixes
/// the series length; 0 derives it from the last trip.
DemandSeries aggregate_history(std::span<const TripRecord> trips, const ZoneMap &zones, Seconds period_seconds,
                               int capacity, const Calendar &cal = {}, int periods = 0);

std::vector<TripRecord> load_trips_csv(const std::filesystem::path &path);
std::vector<TripRecord> read_trips_csv(std::istream &in);
void write_trips_csv(std::ostream &out, std::span<const TripRecord> trips);

/// Geographic placement of a location grid for converting raw taxi records.
struct GridGeometry {
    int rows = 1;
    int cols = 1;
    double origin_lat = 0.0;  // south-west corner
    double origin_lon = 0.0;
    double cell_meters = 200.0;
};

/// Seconds since 1970-01-01 for a "YYYY-MM-DD HH:MM:SS" timestamp (UTC-naive).
Seconds parse_datetime(const std::string &text);

/// Closest grid location to a coordinate (clamped onto the grid).
LocationId nearest_location(const GridGeometry &geo, double lat, double lon);

struct ConversionStats {
    std::size_t rows_read = 0;
    std::size_t rows_written = 0;
    std::size_t rows_skipped = 0;
};

/// Converts NYC-TLC style rows (header naming pickup datetime, passenger
/// count and pickup/dropoff lat/lon) to the trip CSV format, with times
/// relative to `origin_time`. Output is sorted by request time.
ConversionStats convert_tlc(std::istream &in, std::ostream &out, const GridGeometry &geo, Seconds origin_time);

}  // namespace rtrs
