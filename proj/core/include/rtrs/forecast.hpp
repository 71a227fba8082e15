#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rtrs/demand.hpp"
#include "rtrs/network.hpp"

namespace rtrs {

/// delta_zt = d_zt - d_z(t - week) for t >= valid_from; earlier entries are 0
/// and must not be read.
struct DifferencedSeries {
    int week_periods = 0;
    int valid_from = 0;
    std::vector<std::vector<double>> values;  // zone x period

    int zone_count() const noexcept { return static_cast<int>(values.size()); }
    int period_count() const noexcept { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
};

DifferencedSeries difference_weekly(const DemandSeries &series);

/// Scalar autoregression of one zone's differenced demand on the lagged
/// differenced demand of the zone and its neighbours.
struct VarModel {
    ZoneId zone = 0;
    std::vector<ZoneId> neighbor_order;            // zone itself first, then N(z) ascending
    int order = 1;                                 // k
    std::vector<std::vector<double>> coefficients;  // k rows of d entries, lag 1 first
    double noise_variance = 0.0;                   // RSS / n, recorded only
    double aic = 0.0;
    int samples = 0;

    int dimension() const noexcept { return static_cast<int>(neighbor_order.size()); }
};

/// Minimum usable samples fit_var requires for a given k_max and dimension.
int min_var_samples(int k_max, int dimension);

/// Least-squares fit for every k in 1..k_max over a common sample, keeping the
/// k minimising n ln(RSS/n) + 2kd (ties to smaller k). Rank-deficient designs
/// get the minimum-norm solution.
VarModel fit_var(const DifferencedSeries &diff, ZoneId zone, const std::vector<std::vector<ZoneId>> &adjacency,
                 int k_max);

/// phi . [Delta_{t-1}, ..., Delta_{t-k}] using observed differenced values.
double predict_delta(const VarModel &model, const DifferencedSeries &diff, int t);

/// max(0, d_z(t - week) + predicted delta).
double predict_zone(const VarModel &model, const DifferencedSeries &diff, const DemandSeries &series, int t);

/// round_half_up(share_ij * lambda_i), clamped at 0, per destination.
std::vector<std::vector<int>> assign_destinations(std::span<const double> lambda, const DemandSeries &history,
                                                  int hour_class);

/// Exact zone-to-zone counts (post-splitting) of trips requested in
/// [period_start, period_start + period_seconds).
std::vector<std::vector<int>> oracle_forecast(std::span<const TripRecord> trips, Seconds period_start,
                                              Seconds period_seconds, const ZoneMap &zones, int capacity);

void save_models(const std::filesystem::path &dir, std::span<const VarModel> models);
std::vector<VarModel> load_models(const std::filesystem::path &dir);

enum class ForecastGranularity { Period, Hourly };

struct ForecastOptions {
    int k_max = 8;
    ForecastGranularity granularity = ForecastGranularity::Period;
    double scale = 1.0;  // multiplies per-zone predictions before destination assignment
};

/// Per-zone models over a demand history plus multi-step prediction of
/// zone-to-zone demand for the relocation horizon.
class DemandForecaster {
public:
    DemandForecaster(ForecastOptions options, const ZoneMap &zones, Calendar calendar);

    /// Fits every zone on the history; throws ForecastUnavailable when the
    /// history is too short.
    void fit(const DemandSeries &history);
    bool fitted() const noexcept { return !models_.empty(); }
    std::span<const VarModel> models() const noexcept { return models_; }

    /// Per-zone predicted counts for `horizon` periods starting at absolute
    /// period `start`; `observed` holds complete counts for periods < start.
    /// Multi-step lags feed back earlier predictions.
    std::vector<std::vector<double>> zone_forecast(const DemandSeries &observed, int start, int horizon) const;

    /// lambda_ijt for t in [0, horizon): zone forecast, scaled, then split
    /// by the hour-class destination histograms.
    std::vector<std::vector<std::vector<int>>> predict(const DemandSeries &observed, int start, int horizon) const;

private:
    ForecastOptions options_;
    const ZoneMap *zones_;
    Calendar calendar_;
    std::vector<VarModel> models_;
};

/// Sums consecutive periods in groups of `factor` (trailing partial group dropped).
DemandSeries coarsen(const DemandSeries &series, int factor);

}  // namespace rtrs
