#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"

namespace loadcast {

// Contiguous hourly grid: start stamp plus one value slot per hour. Storing
// the values densely makes the grid contract (strictly increasing, 1 h step,
// no holes) hold by construction.
struct HourlyGrid {
    HourStamp start = 0;
    std::size_t size = 0;

    HourStamp end() const { return start + static_cast<HourStamp>(size); }  // exclusive
    bool contains(HourStamp h) const { return h >= start && h < end(); }
    std::size_t index_of(HourStamp h) const { return static_cast<std::size_t>(h - start); }
};

// Mean power per hour in kW for one household, community, or synthetic profile.
// With dt = 1 h the kW value of an hour equals its energy in kWh.
struct LoadSeries {
    std::string id;
    HourStamp start = 0;
    std::vector<double> values_kw;

    HourlyGrid grid() const { return {start, values_kw.size()}; }
    double at(HourStamp h) const { return values_kw[grid().index_of(h)]; }
    double total_kwh() const;
};

// Weather column order is fixed and shared by CSV files and feature windows.
inline constexpr std::size_t kWeatherColumns = 6;
inline constexpr std::array<const char*, kWeatherColumns> kWeatherColumnNames = {
    "temperature_c", "dew_point_c", "wind_direction_deg",
    "wind_speed_kmh", "pressure_hpa", "humidity_pct"};

struct WeatherSeries {
    HourStamp start = 0;
    // row-major: rows_[i] is the 6 columns of hour start + i
    std::vector<std::array<double, kWeatherColumns>> rows;

    HourlyGrid grid() const { return {start, rows.size()}; }
    const std::array<double, kWeatherColumns>& at(HourStamp h) const {
        return rows[grid().index_of(h)];
    }
};

struct PriceSeries {
    HourStamp start = 0;
    std::vector<double> eur_per_kwh;

    HourlyGrid grid() const { return {start, eur_per_kwh.size()}; }
    double at(HourStamp h) const { return eur_per_kwh[grid().index_of(h)]; }
};

struct HolidayCalendar {
    std::string region;
    std::set<CivilDate> dates;

    bool is_holiday(const CivilDate& d) const { return dates.count(d) > 0; }
};

// Virtual energy community: member ids plus the element-wise aggregate.
struct CommunityProfile {
    std::vector<std::string> household_ids;
    std::size_t size = 0;  // h
    LoadSeries aggregate;
};

struct HourRange {
    HourStamp start = 0;  // inclusive
    HourStamp end = 0;    // exclusive
    std::size_t hours() const { return static_cast<std::size_t>(end - start); }
};

enum class Quarter { q1 = 1, q2 = 2, q3 = 3, q4 = 4 };

struct DataSplit {
    HourRange train;
    HourRange test;
    Quarter test_quarter = Quarter::q4;
    int test_year = 0;
    int train_months = 0;
};

// Element-wise sum of member series; members must share one grid.
LoadSeries aggregate_members(const std::vector<const LoadSeries*>& members, const std::string& id);

}  // namespace loadcast
