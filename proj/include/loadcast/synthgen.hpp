#pragma once

#include <array>
#include <string>

#include "loadcast/series.hpp"

namespace loadcast {

enum class ProfileType { household, commercial };
enum class DayClass { workday, saturday, sunday };  // holidays count as sunday
enum class Season { winter, transition, summer };

struct MonthDay {
    int month = 1;
    int day = 1;
};

// Tabulated 24-value base shapes per (profile, season, day class) plus the
// day-of-year dynamization polynomial for household profiles. Shipped as a
// versioned CSV asset (assets/slp_shapes.csv) and embedded as the default.
struct ShapeTable {
    std::string version;
    // [profile][season][day_class][hour]
    std::array<std::array<std::array<std::array<double, 24>, 3>, 3>, 2> weights{};
    // c4..c0, evaluated on the 0-based day of year
    std::array<std::array<double, 5>, 2> dynamization{};
    MonthDay winter_start{11, 1};
    MonthDay winter_end{3, 20};
    MonthDay summer_start{5, 15};
    MonthDay summer_end{9, 14};

    Season season_of(const CivilDate& date) const;
};

DayClass day_class_of(const CivilDate& date, const HolidayCalendar& calendar);

ShapeTable parse_shape_table(const std::string& csv_text, const std::string& origin);
ShapeTable load_shape_table(const std::string& path);
const ShapeTable& default_shape_table();

// Raw dynamization multiplier for one date, normalized to mean 1 over its
// calendar year.
double dynamization_factor(const ShapeTable& table, ProfileType profile, const CivilDate& date);

struct SyntheticSpec {
    ProfileType profile_type = ProfileType::household;
    CivilDate start_date;  // inclusive
    CivilDate end_date;    // exclusive
    double annual_energy_kwh = 1000.0;
    HolidayCalendar calendar;
};

// Hourly profile over the range; each calendar year is scaled so a full year
// sums to annual_energy_kwh.
LoadSeries generate_profile(const SyntheticSpec& spec, const ShapeTable& table);
LoadSeries generate_profile(const SyntheticSpec& spec);

}  // namespace loadcast
