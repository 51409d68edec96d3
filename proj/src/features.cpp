#include "loadcast/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "loadcast/errors.hpp"

namespace loadcast {

std::array<const char*, kFeatureCount> feature_names() {
    return {"dow_mon", "dow_tue", "dow_wed", "dow_thu", "dow_fri", "dow_sat", "dow_sun",
            "hour_sin", "hour_cos", "doy_sin", "doy_cos",
            "load_lag_168h", "load_lag_336h", "load_lag_504h",
            "temperature_c", "dew_point_c", "wind_direction_deg",
            "wind_speed_kmh", "pressure_hpa", "humidity_pct"};
}

std::array<double, kOneHotColumns> encode_day_of_week(const CivilDate& date,
                                                      const HolidayCalendar& calendar) {
    std::array<double, kOneHotColumns> one_hot{};
    int index = calendar.is_holiday(date) ? 6 : weekday(date);
    one_hot[static_cast<std::size_t>(index)] = 1.0;
    return one_hot;
}

std::pair<double, double> encode_cyclic(double value, double period) {
    if (period <= 0.0) throw DataError("cyclic encoding period must be positive");
    constexpr double two_pi = 6.283185307179586476925286766559;
    double angle = two_pi * value / period;
    return {std::sin(angle), std::cos(angle)};
}

CivilDate earliest_buildable_day(const LoadSeries& load, const WeatherSeries& weather) {
    // Lags need 504 h of load history, weather needs the full previous day,
    // and the target day itself must be covered.
    HourStamp from_load = load.start + kLagHours[2];
    HourStamp from_weather = weather.start + 24;
    HourStamp earliest_hour = std::max(from_load, from_weather);
    CivilDate d = date_of(earliest_hour);
    if (hour_of_day(earliest_hour) != 0) d = civil_from_days(days_from_civil(d) + 1);
    return d;
}

FeatureWindow build_window(const CivilDate& day, const LoadSeries& load,
                           const WeatherSeries& weather, const HolidayCalendar& calendar) {
    const HourStamp day_start = hour_stamp(day, 0);
    const HourStamp day_end = day_start + 24;

    bool load_ok = load.grid().contains(day_start - kLagHours[2]) && load.grid().contains(day_end - 1);
    bool weather_ok = weather.grid().contains(day_start - 24) && weather.grid().contains(day_start - 1);
    if (!load_ok || !weather_ok) {
        throw DataError("insufficient history to build the " + format_date(day) +
                        " window; earliest buildable day is " +
                        format_date(earliest_buildable_day(load, weather)));
    }

    FeatureWindow w;
    w.day = day;
    const auto one_hot = encode_day_of_week(day, calendar);
    const auto [doy_sin, doy_cos] =
        encode_cyclic(static_cast<double>(day_of_year(day)), static_cast<double>(days_in_year(day.year)));

    for (std::size_t k = 0; k < kHoursPerDay; ++k) {
        const HourStamp t = day_start + static_cast<HourStamp>(k);
        auto& row = w.x[k];
        for (std::size_t c = 0; c < kOneHotColumns; ++c) row[c] = one_hot[c];
        const auto [hour_sin, hour_cos] = encode_cyclic(static_cast<double>(k), 24.0);
        row[7] = hour_sin;
        row[8] = hour_cos;
        row[9] = doy_sin;
        row[10] = doy_cos;
        for (std::size_t lag = 0; lag < 3; ++lag) row[11 + lag] = load.at(t - kLagHours[lag]);
        const auto& wx = weather.at(day_start - 24 + static_cast<HourStamp>(k));
        for (std::size_t c = 0; c < kWeatherColumns; ++c) row[14 + c] = wx[c];
        w.y[k] = load.at(t);
    }
    return w;
}

std::array<double, kFeatureCount> Normalization::apply(
    const std::array<double, kFeatureCount>& row) const {
    std::array<double, kFeatureCount> out;
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        out[c] = exempt[c] ? row[c] : (row[c] - mean[c]) / std_dev[c];
    }
    return out;
}

std::array<std::array<double, kFeatureCount>, kHoursPerDay> Dataset::normalized(
    std::size_t window_index) const {
    std::array<std::array<double, kFeatureCount>, kHoursPerDay> out;
    const FeatureWindow& w = windows[window_index];
    for (std::size_t k = 0; k < kHoursPerDay; ++k) out[k] = normalization.apply(w.x[k]);
    return out;
}

namespace {

Normalization fit_normalization(const std::vector<FeatureWindow>& train) {
    Normalization norm;
    for (std::size_t c = 0; c < kOneHotColumns; ++c) norm.exempt[c] = true;

    const double n = static_cast<double>(train.size() * kHoursPerDay);
    for (const auto& w : train) {
        for (const auto& row : w.x) {
            for (std::size_t c = 0; c < kFeatureCount; ++c) norm.mean[c] += row[c];
        }
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) norm.mean[c] /= n;
    std::array<double, kFeatureCount> var{};
    for (const auto& w : train) {
        for (const auto& row : w.x) {
            for (std::size_t c = 0; c < kFeatureCount; ++c) {
                double d = row[c] - norm.mean[c];
                var[c] += d * d;
            }
        }
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        double sd = std::sqrt(var[c] / n);
        norm.std_dev[c] = sd > 0.0 ? sd : 1.0;
        if (norm.exempt[c]) {
            norm.mean[c] = 0.0;
            norm.std_dev[c] = 1.0;
        }
    }
    return norm;
}

std::vector<FeatureWindow> windows_for_range(const HourRange& range, std::size_t skip_days,
                                             const LoadSeries& load, const WeatherSeries& weather,
                                             const HolidayCalendar& calendar) {
    std::vector<FeatureWindow> windows;
    std::int64_t first_day = range.start / 24 + static_cast<std::int64_t>(skip_days);
    std::int64_t end_day = range.end / 24;
    for (std::int64_t d = first_day; d < end_day; ++d) {
        windows.push_back(build_window(civil_from_days(d), load, weather, calendar));
    }
    return windows;
}

}  // namespace

std::pair<Dataset, Dataset> build_dataset(const DataSplit& split, const CommunityProfile& community,
                                          const WeatherSeries& weather,
                                          const HolidayCalendar& calendar) {
    constexpr std::size_t lag_drop_days = 21;  // 504 h of lag history
    Dataset train;
    train.windows =
        windows_for_range(split.train, lag_drop_days, community.aggregate, weather, calendar);
    if (train.windows.empty()) {
        throw DataError("training range has no usable windows after dropping the first " +
                        std::to_string(lag_drop_days) + " days");
    }
    train.normalization = fit_normalization(train.windows);

    Dataset test;
    test.windows = windows_for_range(split.test, 0, community.aggregate, weather, calendar);
    test.normalization = train.normalization;
    return {std::move(train), std::move(test)};
}

Dataset build_range_dataset(const LoadSeries& load, const WeatherSeries& weather,
                            const HolidayCalendar& calendar, const HourRange& range,
                            std::size_t skip_days) {
    Dataset set;
    set.windows = windows_for_range(range, skip_days, load, weather, calendar);
    if (set.windows.empty()) throw DataError("range holds no buildable windows");
    set.normalization = fit_normalization(set.windows);
    return set;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset, bool normalized) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create file: " + path);
    out << "day,hour";
    for (const char* name : feature_names()) out << ',' << name;
    out << ",target_kw\n";
    char buf[64];
    for (std::size_t i = 0; i < dataset.windows.size(); ++i) {
        const FeatureWindow& w = dataset.windows[i];
        auto rows = normalized ? dataset.normalized(i) : w.x;
        for (std::size_t k = 0; k < kHoursPerDay; ++k) {
            out << format_date(w.day) << ',' << k;
            for (double v : rows[k]) {
                std::snprintf(buf, sizeof(buf), "%.9g", v);
                out << ',' << buf;
            }
            std::snprintf(buf, sizeof(buf), "%.9g", w.y[k]);
            out << ',' << buf << '\n';
        }
    }
}

}  // namespace loadcast
