#include "rtrs/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace rtrs {

namespace {

Seconds parse_seconds(const std::string &token, std::size_t line) {
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(token, &pos);
    } catch (const std::exception &) {
        throw ParseError(fmt::format("line {}: '{}' is not an integer", line, token), line);
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size())
        throw ParseError(fmt::format("line {}: '{}' is not an integer", line, token), line);
    return value;
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool blank(const std::string &s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::vector<ZoneId>> adjacency_by_threshold(const TravelTimeMatrix &travel,
                                                        const std::vector<std::vector<LocationId>> &members,
                                                        Seconds threshold) {
    const auto zones = members.size();
    std::vector<std::vector<ZoneId>> adj(zones);
    for (std::size_t i = 0; i < zones; ++i) {
        for (std::size_t j = i + 1; j < zones; ++j) {
            Seconds best = std::numeric_limits<Seconds>::max();
            for (auto a : members[i])
                for (auto b : members[j]) best = std::min({best, travel(a, b), travel(b, a)});
            if (best <= threshold) {
                adj[i].push_back(static_cast<ZoneId>(j));
                adj[j].push_back(static_cast<ZoneId>(i));
            }
        }
    }
    for (auto &row : adj) std::sort(row.begin(), row.end());
    return adj;
}

std::vector<std::vector<LocationId>> group_members(const std::vector<ZoneId> &zone_of) {
    ZoneId max_zone = -1;
    for (auto z : zone_of) max_zone = std::max(max_zone, z);
    std::vector<std::vector<LocationId>> members(static_cast<std::size_t>(max_zone + 1));
    for (std::size_t loc = 0; loc < zone_of.size(); ++loc)
        members[static_cast<std::size_t>(zone_of[loc])].push_back(static_cast<LocationId>(loc));
    return members;
}

}  // namespace

std::vector<std::string> TravelTimeMatrix::triangle_violations(std::size_t limit) const {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t c = 0; c < n_; ++c) {
                const auto A = static_cast<LocationId>(a), B = static_cast<LocationId>(b),
                           C = static_cast<LocationId>(c);
                if ((*this)(A, C) > (*this)(A, B) + (*this)(B, C)) {
                    out.push_back(fmt::format("t({},{})={} > t({},{})+t({},{})={}", a, c, (*this)(A, C), a, b,
                                              b, c, (*this)(A, B) + (*this)(B, C)));
                    if (out.size() >= limit) return out;
                }
            }
    return out;
}

Seconds TravelTimeMatrix::min_positive() const {
    Seconds best = 0;
    for (auto s : seconds_)
        if (s > 0 && (best == 0 || s < best)) best = s;
    return best;
}

LocationId Network::closest_in_zone(LocationId from, ZoneId zone) const {
    const auto &mem = zones.members.at(static_cast<std::size_t>(zone));
    LocationId best = mem.front();
    for (auto loc : mem)
        if (travel(from, loc) < travel(from, best)) best = loc;
    return best;
}

Network build_grid(int rows, int cols, Seconds cell_seconds, int zone_rows, int zone_cols,
                   Seconds relocation_period_s) {
    if (rows < 1 || cols < 1) throw ConfigError("grid needs at least one row and one column");
    if (zone_rows < 1 || zone_cols < 1 || rows % zone_rows != 0 || cols % zone_cols != 0)
        throw ConfigError(fmt::format("zone grid {}x{} does not divide location grid {}x{}", zone_rows,
                                      zone_cols, rows, cols));
    if (cell_seconds < 0) throw ConfigError("cell_seconds must be non-negative");
    if (relocation_period_s <= 0) throw ConfigError("relocation period must be positive");

    Network net;
    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    net.locations.reserve(n);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            net.locations.push_back({static_cast<LocationId>(r * cols + c), {r, c}});

    net.travel = TravelTimeMatrix(n);
    for (const auto &a : net.locations)
        for (const auto &b : net.locations)
            net.travel.at(a.id, b.id) =
                cell_seconds * (std::abs(a.cell.row - b.cell.row) + std::abs(a.cell.col - b.cell.col));

    const int block_h = rows / zone_rows;
    const int block_w = cols / zone_cols;
    const int zone_count = zone_rows * zone_cols;
    auto &zm = net.zones;
    zm.zone_of.resize(n);
    zm.members.assign(static_cast<std::size_t>(zone_count), {});
    for (const auto &loc : net.locations) {
        const ZoneId z = (loc.cell.row / block_h) * zone_cols + loc.cell.col / block_w;
        zm.zone_of[static_cast<std::size_t>(loc.id)] = z;
        zm.members[static_cast<std::size_t>(z)].push_back(loc.id);
    }

    zm.adjacency.assign(static_cast<std::size_t>(zone_count), {});
    for (int zr = 0; zr < zone_rows; ++zr)
        for (int zc = 0; zc < zone_cols; ++zc) {
            auto &adj = zm.adjacency[static_cast<std::size_t>(zr * zone_cols + zc)];
            if (zr > 0) adj.push_back((zr - 1) * zone_cols + zc);
            if (zc > 0) adj.push_back(zr * zone_cols + zc - 1);
            if (zc + 1 < zone_cols) adj.push_back(zr * zone_cols + zc + 1);
            if (zr + 1 < zone_rows) adj.push_back((zr + 1) * zone_cols + zc);
        }

    // Block centroids sit at ((zr + 0.5) * h - 0.5, (zc + 0.5) * w - 0.5) in cell coordinates.
    zm.tt_periods.assign(static_cast<std::size_t>(zone_count), std::vector<int>(static_cast<std::size_t>(zone_count), 0));
    for (int i = 0; i < zone_count; ++i)
        for (int j = 0; j < zone_count; ++j) {
            if (i == j) continue;
            const double dr = std::abs(i / zone_cols - j / zone_cols) * static_cast<double>(block_h);
            const double dc = std::abs(i % zone_cols - j % zone_cols) * static_cast<double>(block_w);
            const double secs = static_cast<double>(cell_seconds) * (dr + dc);
            zm.tt_periods[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                static_cast<int>(std::ceil(secs / static_cast<double>(relocation_period_s)));
        }
    return net;
}

TravelTimeMatrix load_travel_matrix(const std::filesystem::path &path, std::vector<std::string> *warnings) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open travel matrix '{}'", path.string()), 0);

    std::vector<std::vector<Seconds>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        std::vector<Seconds> row;
        for (const auto &tok : split_csv(line)) {
            const Seconds v = parse_seconds(tok, line_no);
            if (v < 0) throw ParseError(fmt::format("line {}: negative travel time {}", line_no, v), line_no);
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(fmt::format("line {}: expected {} entries, found {}", line_no, rows.front().size(),
                                         row.size()),
                             line_no);
        rows.push_back(std::move(row));
        if (rows.size() > rows.front().size())
            throw ParseError(fmt::format("line {}: more rows than columns", line_no), line_no);
    }
    if (rows.empty()) throw ParseError("travel matrix is empty", 0);
    if (rows.size() != rows.front().size())
        throw ParseError(fmt::format("travel matrix has {} rows but {} columns", rows.size(), rows.front().size()),
                         line_no);

    TravelTimeMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][i] != 0)
            throw ParseError(fmt::format("row {}: diagonal entry must be 0, found {}", i + 1, rows[i][i]), i + 1);
        for (std::size_t j = 0; j < rows.size(); ++j)
            m.at(static_cast<LocationId>(i), static_cast<LocationId>(j)) = rows[i][j];
    }
    if (warnings) {
        for (auto &v : m.triangle_violations()) warnings->push_back("triangle inequality violated: " + v);
    }
    return m;
}

std::vector<ZoneId> load_zone_assignment(const std::filesystem::path &path, std::size_t location_count) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open zone map '{}'", path.string()), 0);
    std::vector<ZoneId> zone_of(location_count, -1);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw ParseError(fmt::format("line {}: expected 'location_id,zone_id'", line_no), line_no);
        const auto loc = parse_seconds(cells[0], line_no);
        const auto zone = parse_seconds(cells[1], line_no);
        if (loc < 0 || static_cast<std::size_t>(loc) >= location_count)
            throw ParseError(fmt::format("line {}: location {} out of range", line_no, loc), line_no);
        if (zone < 0) throw ParseError(fmt::format("line {}: negative zone id", line_no), line_no);
        if (zone_of[static_cast<std::size_t>(loc)] != -1)
            throw ParseError(fmt::format("line {}: location {} assigned twice", line_no, loc), line_no);
        zone_of[static_cast<std::size_t>(loc)] = static_cast<ZoneId>(zone);
    }
    for (std::size_t i = 0; i < zone_of.size(); ++i)
        if (zone_of[i] < 0) throw ParseError(fmt::format("location {} has no zone", i), 0);
    const auto members = group_members(zone_of);
    for (std::size_t z = 0; z < members.size(); ++z)
        if (members[z].empty()) throw ParseError(fmt::format("zone {} is empty (ids must be dense)", z), 0);
    return zone_of;
}

ZoneMap build_zone_map(const TravelTimeMatrix &travel, std::vector<ZoneId> zone_of, Seconds relocation_period_s) {
    if (relocation_period_s <= 0) throw ConfigError("relocation period must be positive");
    if (zone_of.size() != travel.size()) throw ConfigError("zone map size differs from travel matrix");
    ZoneMap zm;
    zm.members = group_members(zone_of);
    for (std::size_t z = 0; z < zm.members.size(); ++z)
        if (zm.members[z].empty()) throw ConfigError(fmt::format("zone {} is empty", z));
    zm.zone_of = std::move(zone_of);
    zm.adjacency = adjacency_by_threshold(travel, zm.members, travel.min_positive());

    std::vector<LocationId> medoid;
    for (const auto &mem : zm.members) {
        LocationId best = mem.front();
        Seconds best_sum = std::numeric_limits<Seconds>::max();
        for (auto a : mem) {
            Seconds sum = 0;
            for (auto b : mem) sum += travel(a, b) + travel(b, a);
            if (sum < best_sum) best_sum = sum, best = a;
        }
        medoid.push_back(best);
    }
    const auto zones = zm.members.size();
    zm.tt_periods.assign(zones, std::vector<int>(zones, 0));
    for (std::size_t i = 0; i < zones; ++i)
        for (std::size_t j = 0; j < zones; ++j)
            if (i != j)
                zm.tt_periods[i][j] = static_cast<int>((travel(medoid[i], medoid[j]) + relocation_period_s - 1) /
                                                       relocation_period_s);
    return zm;
}

Network load_network(const std::filesystem::path &matrix_path, const std::filesystem::path &zones_path,
                     Seconds relocation_period_s, std::vector<std::string> *warnings) {
    Network net;
    net.travel = load_travel_matrix(matrix_path, warnings);
    const auto n = net.travel.size();
    for (std::size_t i = 0; i < n; ++i)
        net.locations.push_back({static_cast<LocationId>(i), {static_cast<int>(i), 0}});
    net.zones = build_zone_map(net.travel, load_zone_assignment(zones_path, n), relocation_period_s);
    return net;
}

}  // namespace rtrs
