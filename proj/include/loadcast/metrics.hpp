#pragma once

#include <vector>

#include "loadcast/features.hpp"

namespace loadcast {

double mean_absolute_error(const std::vector<double>& forecast, const std::vector<double>& actual);

// 100 * MAE / mean(actual); throws DataError when the mean is not positive.
double nmae(const std::vector<double>& forecast, const std::vector<double>& actual);

template <std::size_t N>
double nmae(const std::array<double, N>& forecast, const std::array<double, N>& actual) {
    return nmae(std::vector<double>(forecast.begin(), forecast.end()),
                std::vector<double>(actual.begin(), actual.end()));
}

struct FeatureCorrelation {
    double r = 0.0;
    bool defined = true;  // false for constant columns, r reported as 0
};

// Pearson correlation of each feature column against the target over all
// window-hours of the dataset (raw, un-normalized features).
std::array<FeatureCorrelation, kFeatureCount> correlate(const Dataset& dataset);

}  // namespace loadcast
