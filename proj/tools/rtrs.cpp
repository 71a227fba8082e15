#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rtrs/engine.hpp"
#include "rtrs/report.hpp"
#include "rtrs/scenario.hpp"

namespace {

std::pair<int, int> parse_dims(const std::string &text) {
    int r = 0, c = 0;
    char x = 0;
    std::istringstream in(text);
    if (!(in >> r >> x >> c) || (x != 'x' && x != 'X') || r < 1 || c < 1)
        throw rtrs::ConfigError(fmt::format("expected RxC, got '{}'", text));
    return {r, c};
}

std::vector<std::size_t> parse_list(const std::string &text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoul(cell));
    return out;
}

struct GridArgs {
    std::string grid = "10x10";
    std::string zones = "2x2";
    rtrs::Seconds cell_seconds = 60;
};

rtrs::Network grid_network(const GridArgs &g, rtrs::Seconds relocation_period) {
    const auto [rows, cols] = parse_dims(g.grid);
    const auto [zr, zc] = parse_dims(g.zones);
    return rtrs::build_grid(rows, cols, g.cell_seconds, zr, zc, relocation_period);
}

void add_grid_options(CLI::App *cmd, GridArgs &g) {
    cmd->add_option("--cell-seconds", g.cell_seconds, "Travel seconds between neighbouring grid cells");
    cmd->add_option("--zone-grid", g.zones, "Zone blocks as RxC");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Rolling-horizon ride-sharing simulator"};
    app.require_subcommand(1);

    // simulate
    auto *sim = app.add_subcommand("simulate", "Run a simulation over a trip file");
    std::string trips_path, network_path, zones_path, config_path, mode, out_dir;
    std::string epoch_dump, relocation_trace;
    std::uint64_t seed = 0;
    GridArgs sim_grid;
    sim->add_option("--trips", trips_path, "Trip CSV")->required();
    auto *net_opt = sim->add_option("--network", network_path, "Travel-time matrix CSV");
    auto *grid_opt = sim->add_option("--grid", sim_grid.grid, "Synthetic grid RxC");
    net_opt->excludes(grid_opt);
    sim->add_option("--zones", zones_path, "location_id,zone_id file (with --network)");
    add_grid_options(sim, sim_grid);
    sim->add_option("--config", config_path, "key=value config file");
    sim->add_option("--mode", mode, "myopic|forecast|oracle");
    auto *seed_opt = sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--out", out_dir, "Report directory")->required();
    sim->add_option("--epoch-dump", epoch_dump, "Directory for per-epoch dispatch dumps");
    sim->add_option("--relocation-trace", relocation_trace, "Directory for per-call relocation traces");

    // report
    auto *rep = app.add_subcommand("report", "Summaries and comparisons of finished runs");
    rep->require_subcommand(1);
    auto *summ = rep->add_subcommand("summarize", "Summary JSON of one run");
    std::string in_dir;
    rtrs::Seconds bins = 30;
    summ->add_option("--in", in_dir, "Report directory")->required();
    summ->add_option("--bin-seconds", bins, "Histogram bin width");
    auto *cmp = rep->add_subcommand("compare", "Improvement of run A over baseline B");
    std::string a_dir, b_dir, thresholds = "40000,50000";
    cmp->add_option("--a", a_dir, "Report directory A")->required();
    cmp->add_option("--b", b_dir, "Report directory B (baseline)")->required();
    cmp->add_option("--size-thresholds", thresholds, "Instance-size bucket edges");

    // convert-tlc
    auto *conv = app.add_subcommand("convert-tlc", "Map NYC-TLC style rows onto a location grid");
    std::string tlc_in, tlc_out, origin_time = "2016-01-04 00:00:00";
    rtrs::GridGeometry geo;
    std::string geo_dims = "10x10";
    conv->add_option("--in", tlc_in, "Raw CSV")->required();
    conv->add_option("--out", tlc_out, "Trip CSV")->required();
    conv->add_option("--grid", geo_dims, "Grid RxC");
    conv->add_option("--lat", geo.origin_lat, "South-west corner latitude")->required();
    conv->add_option("--lon", geo.origin_lon, "South-west corner longitude")->required();
    conv->add_option("--cell-meters", geo.cell_meters, "Grid spacing in meters");
    conv->add_option("--origin", origin_time, "Timestamp mapped to t=0");

    // generate
    auto *gen = app.add_subcommand("generate", "Write a synthetic trip CSV");
    std::string gen_kind = "uniform", gen_out;
    GridArgs gen_grid;
    rtrs::UniformScenario uni;
    rtrs::HotZoneScenario hot;
    std::uint64_t gen_seed = 0;
    gen->add_option("kind", gen_kind, "uniform|hotzone")->check(CLI::IsMember({"uniform", "hotzone"}));
    gen->add_option("--grid", gen_grid.grid, "Grid RxC");
    add_grid_options(gen, gen_grid);
    gen->add_option("--out", gen_out, "Trip CSV")->required();
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--count", uni.count, "uniform: number of trips");
    gen->add_option("--duration", uni.duration, "uniform: window length (s)");
    gen->add_option("--max-passengers", uni.max_passengers, "uniform: largest party");
    gen->add_option("--start", hot.start, "hotzone: first request time (s)");
    gen->add_option("--end", hot.end, "hotzone: end of window (s)");
    gen->add_option("--rotation", hot.rotation_s, "hotzone: seconds per hot zone");
    gen->add_option("--hot-rate", hot.hot_rate_per_hour, "hotzone: hot-zone requests per hour");
    gen->add_option("--base-rate", hot.base_rate_per_hour, "hotzone: per-zone background requests per hour");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            rtrs::SimConfig config;
            if (!config_path.empty()) config = rtrs::load_config(config_path);
            if (!mode.empty()) config.mode = rtrs::parse_mode(mode);
            if (seed_opt->count() > 0) config.seed = seed;
            config.validate();
            std::vector<std::string> warnings;
            rtrs::Network network;
            if (!network_path.empty()) {
                if (zones_path.empty()) throw rtrs::ConfigError("--network needs --zones");
                network = rtrs::load_network(network_path, zones_path, config.relocation_period_s, &warnings);
            } else {
                network = grid_network(sim_grid, config.relocation_period_s);
            }
            for (const auto &w : warnings) std::cerr << "warning: " << w << '\n';
            const auto trips = rtrs::load_trips_csv(trips_path);
            rtrs::EngineOptions opts;
            if (!epoch_dump.empty()) opts.epoch_dump_dir = epoch_dump;
            if (!relocation_trace.empty()) opts.relocation_trace_dir = relocation_trace;
            auto report = rtrs::run(trips, network, config, opts);
            report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
            rtrs::write_report(report, out_dir);
            {
                std::ofstream cfg(std::filesystem::path(out_dir) / "config.txt");
                cfg << rtrs::format_config(config);
            }
            for (const auto &w : report.warnings) std::cerr << "warning: " << w << '\n';
            for (const auto &v : report.violations) std::cerr << "violation: " << v << '\n';
            const auto s = rtrs::summarize(report);
            std::cout << fmt::format("{} requests, mean wait {:.1f} s, std {:.1f} s, {} violations\n", s.requests,
                                     s.waits.mean, s.waits.stddev, s.violations);
            return report.ok() ? 0 : 1;
        }
        if (summ->parsed()) {
            std::cout << rtrs::summary_json(rtrs::summarize(rtrs::load_report(in_dir), bins)) << '\n';
            return 0;
        }
        if (cmp->parsed()) {
            const auto c = rtrs::compare(rtrs::load_report(a_dir), rtrs::load_report(b_dir), parse_list(thresholds));
            std::cout << rtrs::comparison_json(c) << '\n';
            return 0;
        }
        if (conv->parsed()) {
            std::tie(geo.rows, geo.cols) = parse_dims(geo_dims);
            std::ifstream in(tlc_in);
            if (!in) throw std::runtime_error("cannot open " + tlc_in);
            std::ofstream out(tlc_out);
            if (!out) throw std::runtime_error("cannot write " + tlc_out);
            const auto st = rtrs::convert_tlc(in, out, geo, rtrs::parse_datetime(origin_time));
            std::cerr << fmt::format("{} rows read, {} written, {} skipped\n", st.rows_read, st.rows_written,
                                     st.rows_skipped);
            return 0;
        }
        if (gen->parsed()) {
            const auto network = grid_network(gen_grid, 300);
            std::vector<rtrs::TripRecord> trips;
            if (gen_kind == "uniform") {
                uni.seed = gen_seed;
                trips = rtrs::uniform_trips(network, uni);
            } else {
                hot.seed = gen_seed;
                trips = rtrs::hot_zone_trips(network, hot);
            }
            std::ofstream out(gen_out);
            if (!out) throw std::runtime_error("cannot write " + gen_out);
            rtrs::write_trips_csv(out, trips);
            return 0;
        }
    } catch (const rtrs::ParseError &e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
