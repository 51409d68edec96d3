#include "loadcast/metrics.hpp"

#include <cmath>

#include "loadcast/errors.hpp"

namespace loadcast {

double mean_absolute_error(const std::vector<double>& forecast, const std::vector<double>& actual) {
    if (forecast.size() != actual.size() || forecast.empty()) {
        throw DataError("mae: series must share a non-zero length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) sum += std::fabs(actual[i] - forecast[i]);
    return sum / static_cast<double>(forecast.size());
}

double nmae(const std::vector<double>& forecast, const std::vector<double>& actual) {
    double mae = mean_absolute_error(forecast, actual);
    double mean = 0.0;
    for (double v : actual) mean += v;
    mean /= static_cast<double>(actual.size());
    if (mean <= 0.0) {
        throw DataError("nmae: normalization undefined, mean(actual) must be positive");
    }
    return 100.0 * mae / mean;
}

std::array<FeatureCorrelation, kFeatureCount> correlate(const Dataset& dataset) {
    const std::size_t n = dataset.windows.size() * kHoursPerDay;
    std::array<double, kFeatureCount> x_mean{};
    double y_mean = 0.0;
    for (const FeatureWindow& w : dataset.windows) {
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            for (std::size_t c = 0; c < kFeatureCount; ++c) x_mean[c] += w.x[t][c];
            y_mean += w.y[t];
        }
    }
    for (double& v : x_mean) v /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);

    std::array<double, kFeatureCount> xy{}, xx{};
    double yy = 0.0;
    for (const FeatureWindow& w : dataset.windows) {
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            double dy = w.y[t] - y_mean;
            yy += dy * dy;
            for (std::size_t c = 0; c < kFeatureCount; ++c) {
                double dx = w.x[t][c] - x_mean[c];
                xy[c] += dx * dy;
                xx[c] += dx * dx;
            }
        }
    }

    std::array<FeatureCorrelation, kFeatureCount> out;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        if (xx[c] <= 0.0 || yy <= 0.0) {
            out[c] = {0.0, false};
        } else {
            out[c] = {xy[c] / std::sqrt(xx[c] * yy), true};
        }
    }
    return out;
}

}  // namespace loadcast
