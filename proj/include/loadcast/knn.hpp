#pragma once

#include <vector>

#include "loadcast/forecaster.hpp"

namespace loadcast {

// Nearest-neighbour regressor over normalized hourly feature rows. Each
// training window contributes 24 rows; a prediction for one target hour is
// the 1/distance-weighted mean of the k closest rows' targets.
class KnnForecaster final : public Forecaster {
public:
    explicit KnnForecaster(std::size_t k = 40) : k_(k) {}

    void fit(const Dataset& train);
    void fit_rows(std::vector<std::array<double, kFeatureCount>> rows,
                  std::vector<double> targets);
    bool fitted() const { return !rows_.empty(); }
    std::size_t k() const { return k_; }

    // Single-hour prediction in the normalized feature space.
    double predict_row(const std::array<double, kFeatureCount>& features) const;

    std::array<double, kHoursPerDay> forecast(const ForecastDay& day) const override;
    const char* name() const override { return "knn"; }

private:
    std::size_t k_;
    std::vector<std::array<double, kFeatureCount>> rows_;
    std::vector<double> targets_;
};

}  // namespace loadcast
