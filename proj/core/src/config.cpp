#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "rtrs/engine.hpp"

namespace rtrs {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, value));
    return out;
}

bool parse_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::Myopic: return "myopic";
    case Mode::Forecast: return "forecast";
    case Mode::Oracle: return "oracle";
    }
    return "?";
}

Mode parse_mode(const std::string &text) {
    if (text == "myopic") return Mode::Myopic;
    if (text == "forecast") return Mode::Forecast;
    if (text == "oracle") return Mode::Oracle;
    throw ConfigError(fmt::format("unknown mode '{}'", text));
}

DispatchConfig SimConfig::dispatch() const {
    DispatchConfig d;
    d.epoch_seconds = epoch_seconds;
    d.rho = rho;
    d.max_stops = max_stops;
    d.pricing_node_budget = pricing_node_budget;
    d.columns_per_vehicle = columns_per_vehicle;
    d.max_iterations = max_iterations;
    d.mip_node_limit = mip_node_limit;
    d.close_gap = close_gap;
    return d;
}

RoutingContext SimConfig::routing(const TravelTimeMatrix &travel) const {
    return RoutingContext{&travel, alpha, beta};
}

void SimConfig::validate() const {
    if (epoch_seconds <= 0) throw ConfigError("epoch_seconds must be positive");
    if (relocation_period_s <= 0 || 86400 % relocation_period_s != 0)
        throw ConfigError("relocation_period_s must be positive and divide a day");
    if (omega < 1) throw ConfigError("omega must be at least 1");
    if (fleet_size < 0) throw ConfigError("fleet_size must be non-negative");
    if (capacity < 1) throw ConfigError("capacity must be at least 1");
    if (alpha < 1.0) throw ConfigError("alpha must be at least 1");
    if (beta < 0) throw ConfigError("beta must be non-negative");
    if (rho <= 0.0) throw ConfigError("rho must be positive");
    if (sharing_ratio < 1.0) throw ConfigError("sharing_ratio must be at least 1");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (sim_start_s < 0) throw ConfigError("sim_start_s must be non-negative");
    if (forecast_scale < 0.0) throw ConfigError("forecast_scale must be non-negative");
    if (forecast_k_max < 1) throw ConfigError("forecast_k_max must be at least 1");
    if (forecast_granularity == ForecastGranularity::Hourly && 3600 % relocation_period_s != 0)
        throw ConfigError("hourly forecasting needs relocation_period_s to divide an hour");
    if (max_stops < 2) throw ConfigError("max_stops must be at least 2");
    if (pricing_node_budget < 1 || mip_node_limit < 0 || mpc_node_limit < 1)
        throw ConfigError("solver budgets must be positive");
    if (columns_per_vehicle < 1 || max_iterations < 0) throw ConfigError("invalid column generation limits");
}

void set_config_value(SimConfig &c, const std::string &key, const std::string &value) {
    if (key == "epoch_seconds") c.epoch_seconds = parse_number<Seconds>(key, value);
    else if (key == "relocation_period_s") c.relocation_period_s = parse_number<Seconds>(key, value);
    else if (key == "omega") c.omega = parse_number<int>(key, value);
    else if (key == "fleet_size") c.fleet_size = parse_number<int>(key, value);
    else if (key == "capacity") c.capacity = parse_number<int>(key, value);
    else if (key == "alpha") c.alpha = parse_number<double>(key, value);
    else if (key == "beta") c.beta = parse_number<Seconds>(key, value);
    else if (key == "rho") c.rho = parse_number<double>(key, value);
    else if (key == "sharing_ratio") c.sharing_ratio = parse_number<double>(key, value);
    else if (key == "sharing_mode") {
        if (value == "constant") c.sharing_mode = SharingMode::Constant;
        else if (value == "online") c.sharing_mode = SharingMode::Online;
        else throw ConfigError(fmt::format("sharing_mode: unknown value '{}'", value));
    } else if (key == "mode") c.mode = parse_mode(value);
    else if (key == "horizon") c.horizon = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "sim_start_s") c.sim_start_s = parse_number<Seconds>(key, value);
    else if (key == "min_end_s") c.min_end_s = parse_number<Seconds>(key, value);
    else if (key == "drain_limit_s") c.drain_limit_s = parse_number<Seconds>(key, value);
    else if (key == "calendar_offset_s") c.calendar_offset_s = parse_number<Seconds>(key, value);
    else if (key == "shuffle_placement") c.shuffle_placement = parse_bool(key, value);
    else if (key == "forecast_scale") c.forecast_scale = parse_number<double>(key, value);
    else if (key == "forecast_k_max") c.forecast_k_max = parse_number<int>(key, value);
    else if (key == "forecast_granularity") {
        if (value == "period") c.forecast_granularity = ForecastGranularity::Period;
        else if (value == "hourly") c.forecast_granularity = ForecastGranularity::Hourly;
        else throw ConfigError(fmt::format("forecast_granularity: unknown value '{}'", value));
    } else if (key == "max_stops") c.max_stops = parse_number<int>(key, value);
    else if (key == "pricing_node_budget") c.pricing_node_budget = parse_number<long>(key, value);
    else if (key == "columns_per_vehicle") c.columns_per_vehicle = parse_number<int>(key, value);
    else if (key == "max_iterations") c.max_iterations = parse_number<int>(key, value);
    else if (key == "mip_node_limit") c.mip_node_limit = parse_number<long>(key, value);
    else if (key == "close_gap") c.close_gap = parse_bool(key, value);
    else if (key == "mpc_node_limit") c.mpc_node_limit = parse_number<long>(key, value);
    else if (key == "freeze_scheduled") c.freeze_scheduled = parse_bool(key, value);
    else if (key == "relocating_assignable") c.relocating_assignable = parse_bool(key, value);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

SimConfig parse_config(std::istream &in, SimConfig base) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key=value", lineno));
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

SimConfig load_config(const std::filesystem::path &path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    return parse_config(in, std::move(base));
}

std::string format_config(const SimConfig &c) {
    std::string out;
    auto put = [&out](const char *key, const auto &value) { out += fmt::format("{}={}\n", key, value); };
    put("epoch_seconds", c.epoch_seconds);
    put("relocation_period_s", c.relocation_period_s);
    put("omega", c.omega);
    put("fleet_size", c.fleet_size);
    put("capacity", c.capacity);
    put("alpha", c.alpha);
    put("beta", c.beta);
    put("rho", c.rho);
    put("sharing_ratio", c.sharing_ratio);
    put("sharing_mode", c.sharing_mode == SharingMode::Online ? "online" : "constant");
    put("mode", to_string(c.mode));
    put("horizon", c.horizon);
    put("seed", c.seed);
    put("sim_start_s", c.sim_start_s);
    put("min_end_s", c.min_end_s);
    put("drain_limit_s", c.drain_limit_s);
    put("calendar_offset_s", c.calendar_offset_s);
    put("shuffle_placement", c.shuffle_placement);
    put("forecast_scale", c.forecast_scale);
    put("forecast_k_max", c.forecast_k_max);
    put("forecast_granularity", c.forecast_granularity == ForecastGranularity::Hourly ? "hourly" : "period");
    put("max_stops", c.max_stops);
    put("pricing_node_budget", c.pricing_node_budget);
    put("columns_per_vehicle", c.columns_per_vehicle);
    put("max_iterations", c.max_iterations);
    put("mip_node_limit", c.mip_node_limit);
    put("close_gap", c.close_gap);
    put("mpc_node_limit", c.mpc_node_limit);
    put("freeze_scheduled", c.freeze_scheduled);
    put("relocating_assignable", c.relocating_assignable);
    return out;
}

}  // namespace rtrs
