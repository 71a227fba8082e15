#include "rtrs/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace rtrs {

namespace {

std::vector<ZoneId> neighbor_order_of(ZoneId zone, const std::vector<std::vector<ZoneId>> &adjacency) {
    std::vector<ZoneId> order{zone};
    auto nb = adjacency.at(static_cast<std::size_t>(zone));
    std::sort(nb.begin(), nb.end());
    order.insert(order.end(), nb.begin(), nb.end());
    return order;
}

// Multi-step recursion on a count series whose periods < start are observed.
std::vector<std::vector<double>> recursive_forecast(std::span<const VarModel> models,
                                                    const std::vector<std::vector<int>> &counts, int week, int start,
                                                    int horizon) {
    const auto zones = counts.size();
    auto observed = [&](std::size_t z, int t) -> double {
        const auto &row = counts[z];
        return t >= 0 && t < static_cast<int>(row.size()) ? row[static_cast<std::size_t>(t)] : 0.0;
    };
    // predicted delta for t >= start
    std::vector<std::vector<double>> future_delta(zones, std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
    auto delta = [&](std::size_t z, int t) -> double {
        if (t >= start) return future_delta[z][static_cast<std::size_t>(t - start)];
        if (t - week < 0) throw ForecastUnavailable(fmt::format("lag at period {} precedes the first full week", t));
        return observed(z, t) - observed(z, t - week);
    };

    std::vector<std::vector<double>> lambda(zones, std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
    for (int h = 0; h < horizon; ++h) {
        const int t = start + h;
        if (t - week >= start)
            throw ForecastUnavailable("forecast horizon exceeds one week; seasonal base unavailable");
        for (std::size_t z = 0; z < zones; ++z) {
            const auto &m = models[z];
            double d = 0.0;
            for (int lag = 1; lag <= m.order; ++lag) {
                const auto &phi = m.coefficients[static_cast<std::size_t>(lag - 1)];
                for (std::size_t e = 0; e < m.neighbor_order.size(); ++e)
                    d += phi[e] * delta(static_cast<std::size_t>(m.neighbor_order[e]), t - lag);
            }
            future_delta[z][static_cast<std::size_t>(h)] = d;
            lambda[z][static_cast<std::size_t>(h)] = std::max(0.0, observed(z, t - week) + d);
        }
    }
    return lambda;
}

}  // namespace

DifferencedSeries difference_weekly(const DemandSeries &series) {
    const int week = series.week_periods();
    const int T = series.period_count();
    if (T <= week)
        throw ForecastUnavailable(fmt::format("history of {} periods does not exceed one week ({})", T, week));
    DifferencedSeries out;
    out.week_periods = week;
    out.valid_from = week;
    out.values.assign(series.counts.size(), std::vector<double>(static_cast<std::size_t>(T), 0.0));
    for (std::size_t z = 0; z < series.counts.size(); ++z)
        for (int t = week; t < T; ++t)
            out.values[z][static_cast<std::size_t>(t)] =
                series.counts[z][static_cast<std::size_t>(t)] - series.counts[z][static_cast<std::size_t>(t - week)];
    return out;
}

int min_var_samples(int k_max, int dimension) { return k_max * dimension + 2 * k_max + 10; }

VarModel fit_var(const DifferencedSeries &diff, ZoneId zone, const std::vector<std::vector<ZoneId>> &adjacency,
                 int k_max) {
    if (k_max < 1) throw ConfigError("k_max must be at least 1");
    VarModel best;
    best.zone = zone;
    best.neighbor_order = neighbor_order_of(zone, adjacency);
    const int d = best.dimension();
    const int first = diff.valid_from + k_max;
    const int n = diff.period_count() - first;
    if (n < min_var_samples(k_max, d))
        throw ForecastUnavailable(
            fmt::format("zone {}: {} usable samples, need {}", zone, std::max(n, 0), min_var_samples(k_max, d)));

    const auto &target_row = diff.values[static_cast<std::size_t>(zone)];
    Eigen::VectorXd y(n);
    for (int s = 0; s < n; ++s) y(s) = target_row[static_cast<std::size_t>(first + s)];

    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        Eigen::MatrixXd X(n, k * d);
        for (int s = 0; s < n; ++s) {
            const int t = first + s;
            for (int lag = 1; lag <= k; ++lag)
                for (int e = 0; e < d; ++e)
                    X(s, (lag - 1) * d + e) =
                        diff.values[static_cast<std::size_t>(best.neighbor_order[static_cast<std::size_t>(e)])]
                                   [static_cast<std::size_t>(t - lag)];
        }
        const Eigen::VectorXd phi = X.completeOrthogonalDecomposition().solve(y);
        const double rss = (y - X * phi).squaredNorm();
        const double mse = std::max(rss / n, 1e-300);
        const double aic = n * std::log(mse) + 2.0 * k * d;
        if (k == 1 || aic < best_aic - 1e-9 * std::max(1.0, std::abs(best_aic))) {
            best_aic = aic;
            best.order = k;
            best.noise_variance = rss / n;
            best.aic = aic;
            best.coefficients.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d)));
            for (int lag = 0; lag < k; ++lag)
                for (int e = 0; e < d; ++e) {
                    const double v = phi((lag * d) + e);
                    if (!std::isfinite(v)) throw ForecastUnavailable(fmt::format("zone {}: non-finite coefficient", zone));
                    best.coefficients[static_cast<std::size_t>(lag)][static_cast<std::size_t>(e)] = v;
                }
        }
    }
    best.samples = n;
    return best;
}

double predict_delta(const VarModel &model, const DifferencedSeries &diff, int t) {
    if (t - model.order < diff.valid_from)
        throw ForecastUnavailable(fmt::format("period {} lacks {} differenced lags", t, model.order));
    double out = 0.0;
    for (int lag = 1; lag <= model.order; ++lag) {
        const int s = t - lag;
        if (s >= diff.period_count()) throw ForecastUnavailable(fmt::format("lag period {} not observed", s));
        for (std::size_t e = 0; e < model.neighbor_order.size(); ++e)
            out += model.coefficients[static_cast<std::size_t>(lag - 1)][e] *
                   diff.values[static_cast<std::size_t>(model.neighbor_order[e])][static_cast<std::size_t>(s)];
    }
    return out;
}

double predict_zone(const VarModel &model, const DifferencedSeries &diff, const DemandSeries &series, int t) {
    const int base_t = t - series.week_periods();
    if (base_t < 0 || base_t >= series.period_count())
        throw ForecastUnavailable(fmt::format("no seasonal base for period {}", t));
    const double base = series.counts[static_cast<std::size_t>(model.zone)][static_cast<std::size_t>(base_t)];
    return std::max(0.0, base + predict_delta(model, diff, t));
}

std::vector<std::vector<int>> assign_destinations(std::span<const double> lambda, const DemandSeries &history,
                                                  int hour_class) {
    const auto zones = lambda.size();
    std::vector<std::vector<int>> out(zones, std::vector<int>(zones, 0));
    for (std::size_t i = 0; i < zones; ++i) {
        if (lambda[i] <= 0.0) continue;
        for (const auto &[j, share] : history.destination_shares(static_cast<ZoneId>(i), hour_class))
            out[i][static_cast<std::size_t>(j)] = std::max(0, static_cast<int>(std::floor(share * lambda[i] + 0.5)));
    }
    return out;
}

std::vector<std::vector<int>> oracle_forecast(std::span<const TripRecord> trips, Seconds period_start,
                                              Seconds period_seconds, const ZoneMap &zones, int capacity) {
    const auto z = static_cast<std::size_t>(zones.zone_count());
    std::vector<std::vector<int>> out(z, std::vector<int>(z, 0));
    const auto lo = std::lower_bound(trips.begin(), trips.end(), period_start,
                                     [](const TripRecord &t, Seconds v) { return t.request_time < v; });
    for (auto it = lo; it != trips.end() && it->request_time < period_start + period_seconds; ++it) {
        if (it->origin == it->destination) continue;
        const auto i = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(it->origin)]);
        const auto j = static_cast<std::size_t>(zones.zone_of[static_cast<std::size_t>(it->destination)]);
        out[i][j] += (it->passengers + capacity - 1) / capacity;
    }
    return out;
}

void save_models(const std::filesystem::path &dir, std::span<const VarModel> models) {
    std::filesystem::create_directories(dir);
    for (const auto &m : models) {
        std::ofstream out(dir / fmt::format("zone_{}.var", m.zone));
        out << fmt::format("zone {} order {} samples {} noise_variance {:.17g} aic {:.17g}\n", m.zone, m.order,
                           m.samples, m.noise_variance, m.aic);
        out << "neighbors";
        for (auto nb : m.neighbor_order) out << ' ' << nb;
        out << '\n';
        for (const auto &row : m.coefficients) {
            for (std::size_t e = 0; e < row.size(); ++e) out << (e ? " " : "") << fmt::format("{:.17g}", row[e]);
            out << '\n';
        }
    }
}

std::vector<VarModel> load_models(const std::filesystem::path &dir) {
    std::vector<VarModel> models;
    for (int z = 0;; ++z) {
        const auto path = dir / fmt::format("zone_{}.var", z);
        if (!std::filesystem::exists(path)) break;
        std::ifstream in(path);
        VarModel m;
        std::string word;
        std::string line;
        std::getline(in, line);
        {
            std::istringstream hs(line);
            hs >> word >> m.zone >> word >> m.order >> word >> m.samples >> word >> m.noise_variance >> word >> m.aic;
            if (!hs || m.order < 1) throw ParseError(fmt::format("{}: bad header", path.string()), 1);
        }
        std::getline(in, line);
        {
            std::istringstream ns(line);
            ns >> word;
            if (word != "neighbors") throw ParseError(fmt::format("{}: missing neighbors line", path.string()), 2);
            ZoneId nb;
            while (ns >> nb) m.neighbor_order.push_back(nb);
        }
        for (int lag = 0; lag < m.order; ++lag) {
            if (!std::getline(in, line)) throw ParseError(fmt::format("{}: missing lag row", path.string()), 3 + lag);
            std::istringstream rs(line);
            std::vector<double> row;
            double v;
            while (rs >> v) row.push_back(v);
            if (row.size() != m.neighbor_order.size())
                throw ParseError(fmt::format("{}: lag row has {} entries", path.string(), row.size()),
                                 static_cast<std::size_t>(3 + lag));
            m.coefficients.push_back(std::move(row));
        }
        models.push_back(std::move(m));
    }
    return models;
}

DemandSeries coarsen(const DemandSeries &series, int factor) {
    if (factor < 1) throw ConfigError("coarsening factor must be positive");
    DemandSeries out = series;
    out.period_seconds = series.period_seconds * factor;
    out.periods_per_day = series.periods_per_day / factor;
    const int groups = series.period_count() / factor;
    for (std::size_t z = 0; z < series.counts.size(); ++z) {
        out.counts[z].assign(static_cast<std::size_t>(groups), 0);
        for (int g = 0; g < groups; ++g)
            for (int k = 0; k < factor; ++k)
                out.counts[z][static_cast<std::size_t>(g)] += series.counts[z][static_cast<std::size_t>(g * factor + k)];
    }
    return out;
}

DemandForecaster::DemandForecaster(ForecastOptions options, const ZoneMap &zones, Calendar calendar)
    : options_(options), zones_(&zones), calendar_(calendar) {}

void DemandForecaster::fit(const DemandSeries &history) {
    DemandSeries series = history;
    if (options_.granularity == ForecastGranularity::Hourly) {
        if (3600 % history.period_seconds != 0) throw ConfigError("hourly forecasting needs a period dividing 3600 s");
        series = coarsen(history, static_cast<int>(3600 / history.period_seconds));
    }
    const auto diff = difference_weekly(series);
    std::vector<VarModel> models;
    for (int z = 0; z < zones_->zone_count(); ++z)
        models.push_back(fit_var(diff, static_cast<ZoneId>(z), zones_->adjacency, options_.k_max));
    models_ = std::move(models);
}

std::vector<std::vector<double>> DemandForecaster::zone_forecast(const DemandSeries &observed, int start,
                                                                 int horizon) const {
    if (!fitted()) throw ForecastUnavailable("forecaster has not been fitted");
    std::vector<std::vector<int>> counts = observed.counts;
    for (auto &row : counts) row.resize(static_cast<std::size_t>(std::max(start, 0)), 0);

    if (options_.granularity == ForecastGranularity::Period)
        return recursive_forecast(models_, counts, observed.week_periods(), start, horizon);

    const int factor = static_cast<int>(3600 / observed.period_seconds);
    const int hour_start = start / factor;
    const int hour_end = (start + horizon - 1) / factor;
    std::vector<std::vector<int>> hourly(counts.size(), std::vector<int>(static_cast<std::size_t>(hour_start), 0));
    for (std::size_t z = 0; z < counts.size(); ++z)
        for (int h = 0; h < hour_start; ++h)
            for (int k = 0; k < factor; ++k) hourly[z][static_cast<std::size_t>(h)] += counts[z][static_cast<std::size_t>(h * factor + k)];
    const auto per_hour = recursive_forecast(models_, hourly, observed.week_periods() / factor, hour_start,
                                             hour_end - hour_start + 1);
    std::vector<std::vector<double>> out(counts.size(), std::vector<double>(static_cast<std::size_t>(horizon)));
    for (std::size_t z = 0; z < counts.size(); ++z)
        for (int t = 0; t < horizon; ++t)
            out[z][static_cast<std::size_t>(t)] =
                per_hour[z][static_cast<std::size_t>((start + t) / factor - hour_start)] / factor;
    return out;
}

std::vector<std::vector<std::vector<int>>> DemandForecaster::predict(const DemandSeries &observed, int start,
                                                                     int horizon) const {
    const auto lambda_z = zone_forecast(observed, start, horizon);
    const auto zones = lambda_z.size();
    std::vector<std::vector<std::vector<int>>> out(zones, std::vector<std::vector<int>>(zones, std::vector<int>(static_cast<std::size_t>(horizon), 0)));
    for (int t = 0; t < horizon; ++t) {
        std::vector<double> col(zones);
        for (std::size_t z = 0; z < zones; ++z) col[z] = lambda_z[z][static_cast<std::size_t>(t)] * options_.scale;
        const int hc = hour_class(static_cast<Seconds>(start + t) * observed.period_seconds, calendar_);
        const auto split = assign_destinations(col, observed, hc);
        for (std::size_t i = 0; i < zones; ++i)
            for (std::size_t j = 0; j < zones; ++j) out[i][j][static_cast<std::size_t>(t)] = split[i][j];
    }
    return out;
}

}  // namespace rtrs
