#include "loadcast/knn.hpp"

#include <algorithm>
#include <cmath>

#include "loadcast/errors.hpp"

namespace loadcast {

void KnnForecaster::fit(const Dataset& train) {
    std::vector<std::array<double, kFeatureCount>> rows;
    std::vector<double> targets;
    rows.reserve(train.windows.size() * kHoursPerDay);
    targets.reserve(train.windows.size() * kHoursPerDay);
    for (std::size_t w = 0; w < train.windows.size(); ++w) {
        auto normalized = train.normalized(w);
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            rows.push_back(normalized[t]);
            targets.push_back(train.windows[w].y[t]);
        }
    }
    fit_rows(std::move(rows), std::move(targets));
}

void KnnForecaster::fit_rows(std::vector<std::array<double, kFeatureCount>> rows,
                             std::vector<double> targets) {
    if (rows.size() != targets.size()) throw DataError("knn: rows and targets differ in length");
    if (rows.size() < k_) {
        throw DataError("knn needs at least " + std::to_string(k_) + " training rows, got " +
                        std::to_string(rows.size()));
    }
    rows_ = std::move(rows);
    targets_ = std::move(targets);
}

double KnnForecaster::predict_row(const std::array<double, kFeatureCount>& features) const {
    if (rows_.empty()) throw SolveError("knn forecaster is not fitted");

    // (distance^2, index) of the k nearest rows, kept as a max-heap.
    std::vector<std::pair<double, std::size_t>> nearest;
    nearest.reserve(k_ + 1);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            double d = rows_[i][c] - features[c];
            d2 += d * d;
        }
        if (nearest.size() < k_) {
            nearest.emplace_back(d2, i);
            std::push_heap(nearest.begin(), nearest.end());
        } else if (d2 < nearest.front().first) {
            std::pop_heap(nearest.begin(), nearest.end());
            nearest.back() = {d2, i};
            std::push_heap(nearest.begin(), nearest.end());
        }
    }

    // Exact matches dominate: average the zero-distance targets.
    double zero_sum = 0.0;
    std::size_t zero_count = 0;
    for (const auto& [d2, i] : nearest) {
        if (d2 == 0.0) {
            zero_sum += targets_[i];
            ++zero_count;
        }
    }
    if (zero_count > 0) return zero_sum / static_cast<double>(zero_count);

    double weight_sum = 0.0, weighted = 0.0;
    for (const auto& [d2, i] : nearest) {
        double w = 1.0 / std::sqrt(d2);
        weight_sum += w;
        weighted += w * targets_[i];
    }
    return weighted / weight_sum;
}

std::array<double, kHoursPerDay> KnnForecaster::forecast(const ForecastDay& day) const {
    if (day.dataset == nullptr) throw SolveError("knn forecast needs a feature dataset");
    auto rows = day.dataset->normalized(day.window_index);
    std::array<double, kHoursPerDay> out{};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) out[t] = predict_row(rows[t]);
    return out;
}

}  // namespace loadcast
