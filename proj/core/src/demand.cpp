#include "rtrs/demand.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace rtrs {

namespace {

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

long long to_integer(const std::string &tok, std::size_t line) {
    const auto t = trim(tok);
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (t.empty() || pos != t.size()) throw ParseError(fmt::format("line {}: '{}' is not an integer", line, tok), line);
    return v;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

}  // namespace

Seconds max_ride_seconds(Seconds shortest_time, double alpha, Seconds beta) {
    const auto scaled = static_cast<Seconds>(std::floor(alpha * static_cast<double>(shortest_time)));
    return std::max(scaled, beta + shortest_time);
}

std::vector<Request> split_request(const TripRecord &trip, int capacity, const TravelTimeMatrix &travel,
                                   RequestId first_id) {
    if (capacity < 1) throw ConfigError("vehicle capacity must be at least 1");
    std::vector<Request> out;
    int remaining = trip.passengers;
    while (remaining > 0) {
        Request r;
        r.id = first_id + static_cast<RequestId>(out.size());
        r.request_time = trip.request_time;
        r.earliest_pickup = trip.request_time;
        r.riders = std::min(remaining, capacity);
        r.origin = trip.origin;
        r.destination = trip.destination;
        r.shortest_time = travel(trip.origin, trip.destination);
        out.push_back(r);
        remaining -= r.riders;
    }
    return out;
}

std::vector<Request> build_requests(std::span<const TripRecord> trips, int capacity, const TravelTimeMatrix &travel,
                                    std::vector<std::string> *warnings) {
    std::vector<Request> out;
    const auto n = static_cast<LocationId>(travel.size());
    Seconds last = std::numeric_limits<Seconds>::min();
    for (std::size_t i = 0; i < trips.size(); ++i) {
        const auto &t = trips[i];
        if (t.request_time < last) throw IngestionError(fmt::format("trip {} is out of time order", i));
        last = t.request_time;
        if (t.request_time < 0) throw IngestionError(fmt::format("trip {} has negative request time", i));
        if (t.passengers < 1) throw IngestionError(fmt::format("trip {} has no passengers", i));
        if (t.origin < 0 || t.origin >= n || t.destination < 0 || t.destination >= n)
            throw IngestionError(fmt::format("trip {} references an unknown location", i));
        if (t.origin == t.destination) {
            if (warnings) warnings->push_back(fmt::format("trip {} dropped: origin equals destination", i));
            continue;
        }
        auto parts = split_request(t, capacity, travel, static_cast<RequestId>(out.size()));
        out.insert(out.end(), parts.begin(), parts.end());
    }
    return out;
}

std::vector<Request> batch_requests(std::span<const Request> stream, int epoch, Seconds epoch_len) {
    const Seconds lo = static_cast<Seconds>(epoch - 1) * epoch_len;
    const Seconds hi = static_cast<Seconds>(epoch) * epoch_len;
    std::vector<Request> out;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (i > 0 && stream[i].request_time < stream[i - 1].request_time)
            throw IngestionError(fmt::format("request stream unsorted at index {}", i));
        if (stream[i].request_time >= lo && stream[i].request_time < hi) {
            out.push_back(stream[i]);
            out.back().arrival_epoch = epoch;
        }
    }
    return out;
}

EpochBatcher::EpochBatcher(std::span<const Request> stream, Seconds epoch_len)
    : stream_(stream), epoch_len_(epoch_len) {
    for (std::size_t i = 1; i < stream_.size(); ++i)
        if (stream_[i].request_time < stream_[i - 1].request_time)
            throw IngestionError(fmt::format("request stream unsorted at index {}", i));
}

std::vector<Request> EpochBatcher::next(int epoch) {
    const Seconds lo = static_cast<Seconds>(epoch - 1) * epoch_len_;
    const Seconds hi = static_cast<Seconds>(epoch) * epoch_len_;
    while (cursor_ < stream_.size() && stream_[cursor_].request_time < lo) ++cursor_;
    std::vector<Request> out;
    while (cursor_ < stream_.size() && stream_[cursor_].request_time < hi) {
        out.push_back(stream_[cursor_++]);
        out.back().arrival_epoch = epoch;
    }
    return out;
}

int hour_class(Seconds t, const Calendar &cal) {
    constexpr Seconds day = 86400;
    const Seconds shifted = t + cal.offset_s;
    const Seconds day_index = shifted >= 0 ? shifted / day : (shifted - day + 1) / day;
    const Seconds within = shifted - day_index * day;
    const auto dow = ((day_index % 7) + 7) % 7;  // 0 = Monday
    const int weekend = dow >= 5 ? 1 : 0;
    return weekend * 24 + static_cast<int>(within / 3600);
}

std::vector<std::pair<ZoneId, double>> DemandSeries::destination_shares(ZoneId zone, int hclass) const {
    std::vector<std::pair<ZoneId, double>> out;
    const auto &row = destination_counts.at(static_cast<std::size_t>(zone)).at(static_cast<std::size_t>(hclass));
    long long total = 0;
    for (auto c : row) total += c;
    if (total == 0) return out;
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] > 0) out.emplace_back(static_cast<ZoneId>(j), static_cast<double>(row[j]) / static_cast<double>(total));
    return out;
}

void DemandSeries::extend_to(int periods) {
    for (auto &row : counts)
        if (static_cast<int>(row.size()) < periods) row.resize(static_cast<std::size_t>(periods), 0);
}

void DemandSeries::add(const Request &req, const ZoneMap &zones, const Calendar &cal) {
    const auto p = static_cast<int>(req.request_time / period_seconds);
    extend_to(p + 1);
    const auto oz = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(req.origin)]);
    const auto dz = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(req.destination)]);
    counts[oz][static_cast<std::size_t>(p)] += 1;
    destination_counts[oz][static_cast<std::size_t>(hour_class(req.request_time, cal))][dz] += 1;
}

DemandSeries empty_series(int zone_count, Seconds period_seconds) {
    if (period_seconds <= 0 || 86400 % period_seconds != 0)
        throw ConfigError(fmt::format("relocation period {} s must divide a day", period_seconds));
    DemandSeries s;
    s.period_seconds = period_seconds;
    s.periods_per_day = static_cast<int>(86400 / period_seconds);
    const auto z = static_cast<std::size_t>(zone_count);
    s.counts.assign(z, {});
    s.destination_counts.assign(z, std::vector<std::vector<int>>(kHourClasses, std::vector<int>(z, 0)));
    return s;
}

DemandSeries aggregate_history(std::span<const TripRecord> trips, const ZoneMap &zones, Seconds period_seconds,
                               int capacity, const Calendar &cal, int periods) {
    if (capacity < 1) throw ConfigError("vehicle capacity must be at least 1");
    auto s = empty_series(zones.zone_count(), period_seconds);
    int needed = periods;
    for (const auto &t : trips) needed = std::max(needed, static_cast<int>(t.request_time / period_seconds) + 1);
    if (periods > 0) needed = periods;
    s.extend_to(needed);
    for (const auto &t : trips) {
        if (t.origin == t.destination) continue;
        if (periods > 0 && t.request_time >= static_cast<Seconds>(periods) * period_seconds) continue;
        const int parts = (t.passengers + capacity - 1) / capacity;
        Request r;
        r.request_time = t.request_time;
        r.origin = t.origin;
        r.destination = t.destination;
        for (int k = 0; k < parts; ++k) s.add(r, zones, cal);
    }
    return s;
}

std::vector<TripRecord> read_trips_csv(std::istream &in) {
    std::vector<TripRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (lower(trim(line)) == "request_time_s,passengers,origin_id,destination_id") continue;
            if (!std::isdigit(static_cast<unsigned char>(trim(line).front())) && trim(line).front() != '-')
                throw ParseError(fmt::format("line {}: unexpected header '{}'", line_no, line), line_no);
        }
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw ParseError(fmt::format("line {}: expected 4 fields", line_no), line_no);
        TripRecord t;
        t.request_time = to_integer(cells[0], line_no);
        t.passengers = static_cast<int>(to_integer(cells[1], line_no));
        t.origin = static_cast<LocationId>(to_integer(cells[2], line_no));
        t.destination = static_cast<LocationId>(to_integer(cells[3], line_no));
        if (t.request_time < 0) throw ParseError(fmt::format("line {}: negative request time", line_no), line_no);
        if (t.passengers < 1) throw ParseError(fmt::format("line {}: passengers must be >= 1", line_no), line_no);
        out.push_back(t);
    }
    return out;
}

std::vector<TripRecord> load_trips_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open trip file '{}'", path.string()), 0);
    return read_trips_csv(in);
}

void write_trips_csv(std::ostream &out, std::span<const TripRecord> trips) {
    out << "request_time_s,passengers,origin_id,destination_id\n";
    for (const auto &t : trips) out << t.request_time << ',' << t.passengers << ',' << t.origin << ',' << t.destination << '\n';
}

Seconds parse_datetime(const std::string &text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const auto t = trim(text);
    if (std::sscanf(t.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6 &&
        std::sscanf(t.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
        throw ParseError(fmt::format("bad timestamp '{}'", text), 0);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
        throw ParseError(fmt::format("bad timestamp '{}'", text), 0);
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + h * 3600 + mi * 60 + s;
}

LocationId nearest_location(const GridGeometry &geo, double lat, double lon) {
    constexpr double meters_per_degree = 111320.0;
    const double north = (lat - geo.origin_lat) * meters_per_degree;
    const double east = (lon - geo.origin_lon) * meters_per_degree * std::cos(geo.origin_lat * std::numbers::pi / 180.0);
    const int row = std::clamp(static_cast<int>(std::floor(north / geo.cell_meters)), 0, geo.rows - 1);
    const int col = std::clamp(static_cast<int>(std::floor(east / geo.cell_meters)), 0, geo.cols - 1);
    return static_cast<LocationId>(row * geo.cols + col);
}

ConversionStats convert_tlc(std::istream &in, std::ostream &out, const GridGeometry &geo, Seconds origin_time) {
    ConversionStats stats;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("TLC file is empty", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    auto find = [&](std::initializer_list<const char *> names) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto h = lower(trim(header[i]));
            for (const char *name : names)
                if (h.find(name) != std::string::npos) return i;
        }
        throw ParseError(fmt::format("TLC header lacks a '{}' column", *names.begin()), 1);
    };
    const auto c_time = find({"pickup_datetime"});
    const auto c_pax = find({"passenger_count"});
    const auto c_plat = find({"pickup_latitude"});
    const auto c_plon = find({"pickup_longitude"});
    const auto c_dlat = find({"dropoff_latitude"});
    const auto c_dlon = find({"dropoff_longitude"});
    const auto need = std::max({c_time, c_pax, c_plat, c_plon, c_dlat, c_dlon});

    std::vector<TripRecord> trips;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++stats.rows_read;
        const auto cells = split_csv(line);
        if (cells.size() <= need) throw ParseError(fmt::format("line {}: too few columns", line_no), line_no);
        try {
            const Seconds t = parse_datetime(cells[c_time]) - origin_time;
            const int pax = std::stoi(cells[c_pax]);
            const double plat = std::stod(cells[c_plat]), plon = std::stod(cells[c_plon]);
            const double dlat = std::stod(cells[c_dlat]), dlon = std::stod(cells[c_dlon]);
            if (t < 0 || pax < 1 || plat == 0.0 || plon == 0.0 || dlat == 0.0 || dlon == 0.0) {
                ++stats.rows_skipped;
                continue;
            }
            trips.push_back({t, pax, nearest_location(geo, plat, plon), nearest_location(geo, dlat, dlon)});
        } catch (const ParseError &) {
            throw ParseError(fmt::format("line {}: bad timestamp", line_no), line_no);
        } catch (const std::exception &) {
            throw ParseError(fmt::format("line {}: malformed numeric field", line_no), line_no);
        }
    }
    std::stable_sort(trips.begin(), trips.end(),
                     [](const TripRecord &a, const TripRecord &b) { return a.request_time < b.request_time; });
    write_trips_csv(out, trips);
    stats.rows_written = trips.size();
    return stats;
}

}  // namespace rtrs
