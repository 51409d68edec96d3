#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "loadcast/series.hpp"
#include "loadcast/split.hpp"

namespace loadcast {

// Fixed model-input schema, one row per forecast-day hour:
//   0..6   day-of-week one-hot (Monday = 0 .. Sunday = 6, holidays as Sunday)
//   7..8   hour-of-day sin / cos
//   9..10  day-of-year sin / cos
//   11..13 lagged load at t-168 h, t-336 h, t-504 h (kW)
//   14..19 weather at the same clock hour of the previous day
inline constexpr std::size_t kFeatureCount = 20;
inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr std::size_t kOneHotColumns = 7;
inline constexpr int kLagHours[3] = {168, 336, 504};

std::array<const char*, kFeatureCount> feature_names();

struct FeatureWindow {
    CivilDate day;
    // row-major 24 x 20
    std::array<std::array<double, kFeatureCount>, kHoursPerDay> x{};
    std::array<double, kHoursPerDay> y{};  // target loads, kW
};

// Monday = index 0 ... Sunday = index 6; public holidays map to Sunday.
std::array<double, kOneHotColumns> encode_day_of_week(const CivilDate& date,
                                                      const HolidayCalendar& calendar);

// (sin(2*pi*value/period), cos(2*pi*value/period)); period > 0.
std::pair<double, double> encode_cyclic(double value, double period);

FeatureWindow build_window(const CivilDate& day, const LoadSeries& load,
                           const WeatherSeries& weather, const HolidayCalendar& calendar);

// The earliest day for which build_window's history preconditions hold.
CivilDate earliest_buildable_day(const LoadSeries& load, const WeatherSeries& weather);

struct Normalization {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std_dev{};  // constant columns get 1
    std::array<bool, kFeatureCount> exempt{};     // one-hot columns pass through

    std::array<double, kFeatureCount> apply(const std::array<double, kFeatureCount>& row) const;
};

struct Dataset {
    std::vector<FeatureWindow> windows;
    Normalization normalization;

    // 24 x 20 feature rows of one window with normalization applied.
    std::array<std::array<double, kFeatureCount>, kHoursPerDay> normalized(
        std::size_t window_index) const;
};

// One window per calendar day of each range; the first 21 days of the training
// range are dropped for lag availability. Normalization is fit on the training
// windows only and shared with the test set. Targets stay in kW.
std::pair<Dataset, Dataset> build_dataset(const DataSplit& split, const CommunityProfile& community,
                                          const WeatherSeries& weather,
                                          const HolidayCalendar& calendar);

// Self-normalized dataset over every buildable day of the range (used for
// pretraining on synthetic profiles). skip_days drops leading days.
Dataset build_range_dataset(const LoadSeries& load, const WeatherSeries& weather,
                            const HolidayCalendar& calendar, const HourRange& range,
                            std::size_t skip_days = 0);

// Debug/inspection dump: one CSV row per window-hour (20 features + target).
void write_dataset_csv(const std::string& path, const Dataset& dataset, bool normalized);

}  // namespace loadcast
