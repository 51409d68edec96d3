#pragma once

#include <array>
#include <memory>

#include "loadcast/features.hpp"
#include "loadcast/series.hpp"

namespace loadcast {

// Everything a family might need to forecast one day: persistence reads the
// raw history, knn and the deep models read the prepared feature dataset.
struct ForecastDay {
    CivilDate day;
    const LoadSeries* history = nullptr;     // covers day - 504 h when needed
    const Dataset* dataset = nullptr;        // test dataset holding the window
    std::size_t window_index = 0;
};

class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::array<double, kHoursPerDay> forecast(const ForecastDay& day) const = 0;
    virtual const char* name() const = 0;
};

// Next day's load taken as the load exactly seven days earlier.
std::array<double, kHoursPerDay> persistence_forecast(const LoadSeries& history,
                                                      const CivilDate& day);

class PersistenceForecaster final : public Forecaster {
public:
    std::array<double, kHoursPerDay> forecast(const ForecastDay& day) const override {
        return persistence_forecast(*day.history, day.day);
    }
    const char* name() const override { return "persistence"; }
};

// Oracle that returns the realized load; used as the perfect-prediction
// baseline in the dispatch case study.
class PerfectForecaster final : public Forecaster {
public:
    std::array<double, kHoursPerDay> forecast(const ForecastDay& day) const override;
    const char* name() const override { return "perfect"; }
};

}  // namespace loadcast
