#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "rtrs/report.hpp"

namespace rtrs {

namespace {

using nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path &file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
    return out;
}

std::ifstream open_in(const std::filesystem::path &file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", file.string()));
    return in;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &file) {
    auto in = open_in(file);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

long long num(const std::vector<std::string> &row, std::size_t i, const std::filesystem::path &file) {
    if (i >= row.size()) throw ParseError(fmt::format("{}: short row", file.string()), 0);
    return std::stoll(row[i]);
}

ordered_json stats_json(const WaitStats &s) {
    return {{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"p50", s.p50},
            {"p90", s.p90},     {"p99", s.p99},   {"min", s.min},    {"max", s.max}};
}

std::vector<double> completed_waits(const SimulationReport &r) {
    std::vector<double> w;
    for (const auto &o : r.requests)
        if (o.pickup >= 0) w.push_back(static_cast<double>(o.wait()));
    return w;
}

}  // namespace

double percentile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    std::sort(sorted.begin(), sorted.end());
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

WaitStats wait_stats(const std::vector<double> &values) {
    WaitStats s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.p50 = percentile(sorted, 0.50);
    s.p90 = percentile(sorted, 0.90);
    s.p99 = percentile(sorted, 0.99);
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

Summary summarize(const SimulationReport &report, Seconds bin_seconds) {
    if (bin_seconds <= 0) throw std::invalid_argument("histogram bin width must be positive");
    Summary s;
    s.mode = report.mode;
    s.bin_seconds = bin_seconds;
    s.requests = report.requests.size();
    const auto waits = completed_waits(report);
    s.waits = wait_stats(waits);
    std::vector<double> rides;
    for (const auto &o : report.requests)
        if (o.completed()) {
            ++s.completed;
            rides.push_back(static_cast<double>(o.ride()));
        }
    s.rides = wait_stats(rides);

    if (!waits.empty()) {
        const auto top = static_cast<Seconds>(s.waits.max);
        const auto bins = static_cast<std::size_t>(top / bin_seconds + 1);
        s.histogram.resize(bins);
        for (std::size_t b = 0; b < bins; ++b)
            s.histogram[b] = {static_cast<Seconds>(b) * bin_seconds, static_cast<Seconds>(b + 1) * bin_seconds, 0};
        for (double w : waits) ++s.histogram[static_cast<std::size_t>(static_cast<Seconds>(w) / bin_seconds)].count;
    }

    int zones = report.zone_count;
    for (const auto &o : report.requests) zones = std::max(zones, o.origin_zone + 1);
    std::vector<double> zone_sum(static_cast<std::size_t>(zones), 0.0);
    std::vector<std::size_t> zone_n(static_cast<std::size_t>(zones), 0);
    std::vector<std::size_t> zone_picked(static_cast<std::size_t>(zones), 0);
    for (const auto &o : report.requests) {
        const auto z = static_cast<std::size_t>(o.origin_zone);
        ++zone_n[z];
        if (o.pickup >= 0) {
            ++zone_picked[z];
            zone_sum[z] += static_cast<double>(o.wait());
        }
    }
    for (int z = 0; z < zones; ++z) {
        const auto zi = static_cast<std::size_t>(z);
        s.zones.push_back({z, zone_n[zi], zone_picked[zi] ? zone_sum[zi] / static_cast<double>(zone_picked[zi]) : 0.0});
    }

    s.vehicles = report.vehicles;
    for (const auto &v : report.vehicles) {
        s.idle_s += v.idle_s;
        s.serving_s += v.serving_s;
        s.relocating_s += v.relocating_s;
        s.relocation_moves += static_cast<std::size_t>(v.relocations);
    }
    long occupied = 0;
    long riders = 0;
    for (const auto &o : report.occupancy) {
        occupied += o.occupied;
        riders += o.riders;
    }
    s.mean_riders_per_occupied = occupied ? static_cast<double>(riders) / static_cast<double>(occupied) : 0.0;
    s.violations = report.violations.size();
    return s;
}

std::string size_bucket(std::size_t requests, const std::vector<std::size_t> &thresholds) {
    auto sorted = thresholds;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty()) return "all";
    if (requests < sorted.front()) return fmt::format("<{}", sorted.front());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (requests < sorted[i + 1]) return fmt::format("{}-{}", sorted[i], sorted[i + 1] - 1);
    return fmt::format(">={}", sorted.back());
}

Comparison compare(const SimulationReport &a, const SimulationReport &b,
                   const std::vector<std::size_t> &size_thresholds) {
    if (a.requests.size() != b.requests.size())
        throw std::invalid_argument(
            fmt::format("reports cover different trip sets ({} vs {} requests)", a.requests.size(), b.requests.size()));
    for (std::size_t i = 0; i < a.requests.size(); ++i) {
        const auto &x = a.requests[i].request;
        const auto &y = b.requests[i].request;
        if (x.id != y.id || x.request_time != y.request_time || x.origin != y.origin ||
            x.destination != y.destination || x.riders != y.riders)
            throw std::invalid_argument(fmt::format("reports differ at request {}", i));
    }
    Comparison c;
    c.requests = a.requests.size();
    c.size_bucket = size_bucket(c.requests, size_thresholds);
    c.a = wait_stats(completed_waits(a));
    c.b = wait_stats(completed_waits(b));
    if (c.b.count > 0 && c.b.mean != 0.0) c.improvement_pct = 100.0 * (c.b.mean - c.a.mean) / c.b.mean;
    else if (c.b.count > 0 && c.a.mean == 0.0) c.improvement_pct = 0.0;

    const auto sa = summarize(a);
    const auto sb = summarize(b);
    const auto zones = std::max(sa.zones.size(), sb.zones.size());
    for (std::size_t z = 0; z < zones; ++z) {
        ZoneImprovement zi;
        zi.zone = static_cast<ZoneId>(z);
        zi.requests = z < sa.zones.size() ? sa.zones[z].requests : 0;
        zi.mean_a = z < sa.zones.size() ? sa.zones[z].mean_wait : 0.0;
        zi.mean_b = z < sb.zones.size() ? sb.zones[z].mean_wait : 0.0;
        if (zi.requests > 0) {
            if (zi.mean_b != 0.0) zi.improvement_pct = 100.0 * (zi.mean_b - zi.mean_a) / zi.mean_b;
            else if (zi.mean_a == 0.0) zi.improvement_pct = 0.0;
        }
        c.zones.push_back(zi);
    }
    return c;
}

std::string summary_json(const Summary &s) {
    ordered_json hist = ordered_json::array();
    for (const auto &b : s.histogram) hist.push_back({b.lower, b.upper, b.count});
    ordered_json zones = ordered_json::array();
    for (const auto &z : s.zones) zones.push_back({{"zone", z.zone}, {"requests", z.requests}, {"mean_wait", z.mean_wait}});
    ordered_json vehicles = ordered_json::array();
    for (const auto &v : s.vehicles)
        vehicles.push_back({{"id", v.id},
                            {"idle_s", v.idle_s},
                            {"serving_s", v.serving_s},
                            {"relocating_s", v.relocating_s},
                            {"relocations", v.relocations},
                            {"requests_served", v.requests_served}});
    ordered_json j{{"schema_version", kReportSchemaVersion},
                   {"mode", s.mode},
                   {"std_convention", "population"},
                   {"percentile_method", "linear"},
                   {"requests", s.requests},
                   {"completed", s.completed},
                   {"wait_s", stats_json(s.waits)},
                   {"ride_s", stats_json(s.rides)},
                   {"histogram_bin_s", s.bin_seconds},
                   {"histogram", std::move(hist)},
                   {"zones", std::move(zones)},
                   {"fleet",
                    {{"idle_s", s.idle_s},
                     {"serving_s", s.serving_s},
                     {"relocating_s", s.relocating_s},
                     {"relocation_moves", s.relocation_moves},
                     {"mean_riders_per_occupied", s.mean_riders_per_occupied}}},
                   {"vehicles", std::move(vehicles)},
                   {"violations", s.violations}};
    return j.dump(2);
}

std::string comparison_json(const Comparison &c) {
    auto pct = [](const std::optional<double> &v) { return v ? ordered_json(*v) : ordered_json("n/a"); };
    ordered_json zones = ordered_json::array();
    for (const auto &z : c.zones)
        zones.push_back({{"zone", z.zone},
                         {"requests", z.requests},
                         {"mean_a", z.mean_a},
                         {"mean_b", z.mean_b},
                         {"improvement_pct", pct(z.improvement_pct)}});
    ordered_json j{{"schema_version", kReportSchemaVersion},
                   {"requests", c.requests},
                   {"size_bucket", c.size_bucket},
                   {"a", stats_json(c.a)},
                   {"b", stats_json(c.b)},
                   {"improvement_pct", pct(c.improvement_pct)},
                   {"zones", std::move(zones)}};
    return j.dump(2);
}

void write_histogram(const Summary &summary, const std::filesystem::path &file) {
    auto out = open_out(file);
    out << "# lower_s upper_s count\n";
    for (const auto &b : summary.histogram) out << b.lower << ' ' << b.upper << ' ' << b.count << '\n';
}

void write_report(const SimulationReport &r, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "requests.csv");
        out << "id,request_time_s,riders,origin_id,destination_id,origin_zone,destination_zone,arrival_epoch,"
               "shortest_s,max_ride_s,vehicle,pickup_s,dropoff_s,wait_s\n";
        for (const auto &o : r.requests)
            out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", o.request.id, o.request.request_time,
                               o.request.riders, o.request.origin, o.request.destination, o.origin_zone,
                               o.destination_zone, o.request.arrival_epoch, o.request.shortest_time, o.max_ride,
                               o.vehicle, o.pickup, o.dropoff, o.pickup >= 0 ? o.wait() : -1);
    }
    {
        auto out = open_out(dir / "vehicles.csv");
        out << "id,start_location,idle_s,serving_s,relocating_s,relocations,requests_served\n";
        for (const auto &v : r.vehicles)
            out << fmt::format("{},{},{},{},{},{},{}\n", v.id, v.start_location, v.idle_s, v.serving_s,
                               v.relocating_s, v.relocations, v.requests_served);
    }
    {
        auto out = open_out(dir / "epochs.csv");
        out << "epoch,time_s,batch,pending,vehicles,pool,iterations,lp_objective,mip_objective,unserved,"
               "pricing_nodes,mip_nodes,budget_exhausted,lp_trace\n";
        for (const auto &e : r.epochs)
            out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", e.epoch, e.time, e.batch, e.pending,
                               e.vehicles, e.pool, e.iterations, e.lp_objective, e.mip_objective, e.unserved,
                               e.pricing_nodes, e.mip_nodes, e.budget_exhausted ? 1 : 0,
                               fmt::join(e.lp_trace, ";"));
    }
    {
        auto out = open_out(dir / "occupancy.csv");
        out << "time_s,occupied,riders\n";
        for (const auto &o : r.occupancy) out << fmt::format("{},{},{}\n", o.time, o.occupied, o.riders);
    }
    {
        auto out = open_out(dir / "relocations.csv");
        out << "epoch,time_s,idle_vehicles,mpc_objective,mpc_unserved,mpc_nodes,mpc_optimal,moves,travel_s,"
               "overflow_events\n";
        for (const auto &x : r.relocations)
            out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", x.epoch, x.time, x.idle_vehicles, x.mpc_objective,
                               x.mpc_unserved, x.mpc_nodes, x.mpc_optimal ? 1 : 0, x.moves, x.travel_seconds,
                               x.overflow_events);
    }
    {
        auto out = open_out(dir / "violations.txt");
        for (const auto &v : r.violations) out << v << '\n';
    }
    {
        ordered_json meta{{"schema_version", kReportSchemaVersion},
                          {"mode", r.mode},
                          {"seed", r.seed},
                          {"start_s", r.start},
                          {"end_s", r.end},
                          {"zone_count", r.zone_count},
                          {"warnings", r.warnings}};
        auto out = open_out(dir / "meta.json");
        out << meta.dump(2) << '\n';
    }
    const auto summary = summarize(r);
    {
        auto out = open_out(dir / "summary.json");
        out << summary_json(summary) << '\n';
    }
    {
        auto out = open_out(dir / "zones.csv");
        out << "zone,requests,mean_wait_s\n";
        for (const auto &z : summary.zones) out << fmt::format("{},{},{}\n", z.zone, z.requests, z.mean_wait);
    }
    write_histogram(summary, dir / "wait_histogram.dat");
}

SimulationReport load_report(const std::filesystem::path &dir) {
    SimulationReport r;
    {
        auto in = open_in(dir / "meta.json");
        const auto meta = nlohmann::json::parse(in);
        if (meta.at("schema_version").get<int>() != kReportSchemaVersion)
            throw ParseError(fmt::format("{}: unsupported report schema", dir.string()), 0);
        r.mode = meta.at("mode").get<std::string>();
        r.seed = meta.at("seed").get<std::uint64_t>();
        r.start = meta.at("start_s").get<Seconds>();
        r.end = meta.at("end_s").get<Seconds>();
        r.zone_count = meta.at("zone_count").get<int>();
        r.warnings = meta.at("warnings").get<std::vector<std::string>>();
    }
    const auto req_file = dir / "requests.csv";
    for (const auto &row : read_csv(req_file)) {
        RequestOutcome o;
        o.request.id = static_cast<RequestId>(num(row, 0, req_file));
        o.request.request_time = num(row, 1, req_file);
        o.request.earliest_pickup = o.request.request_time;
        o.request.riders = static_cast<int>(num(row, 2, req_file));
        o.request.origin = static_cast<LocationId>(num(row, 3, req_file));
        o.request.destination = static_cast<LocationId>(num(row, 4, req_file));
        o.origin_zone = static_cast<ZoneId>(num(row, 5, req_file));
        o.destination_zone = static_cast<ZoneId>(num(row, 6, req_file));
        o.request.arrival_epoch = static_cast<int>(num(row, 7, req_file));
        o.request.shortest_time = num(row, 8, req_file);
        o.max_ride = num(row, 9, req_file);
        o.vehicle = static_cast<VehicleId>(num(row, 10, req_file));
        o.pickup = num(row, 11, req_file);
        o.dropoff = num(row, 12, req_file);
        r.requests.push_back(o);
    }
    const auto veh_file = dir / "vehicles.csv";
    for (const auto &row : read_csv(veh_file))
        r.vehicles.push_back({static_cast<VehicleId>(num(row, 0, veh_file)),
                              static_cast<LocationId>(num(row, 1, veh_file)), num(row, 2, veh_file),
                              num(row, 3, veh_file), num(row, 4, veh_file), static_cast<int>(num(row, 5, veh_file)),
                              static_cast<int>(num(row, 6, veh_file))});
    const auto occ_file = dir / "occupancy.csv";
    for (const auto &row : read_csv(occ_file))
        r.occupancy.push_back(
            {num(row, 0, occ_file), static_cast<int>(num(row, 1, occ_file)), static_cast<int>(num(row, 2, occ_file))});
    {
        auto in = open_in(dir / "violations.txt");
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) r.violations.push_back(line);
    }
    return r;
}

}  // namespace rtrs
