#include "loadcast/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "loadcast/csvio.hpp"
#include "loadcast/errors.hpp"

namespace loadcast {

extern const char* kEmbeddedShapeTableCsv;  // generated from assets/slp_shapes.csv

namespace {

int profile_index(const std::string& name, const std::string& origin) {
    if (name == "household") return 0;
    if (name == "commercial") return 1;
    throw DataError(origin + ": unknown profile type '" + name + "'");
}

int season_index(const std::string& name, const std::string& origin) {
    if (name == "winter") return 0;
    if (name == "transition") return 1;
    if (name == "summer") return 2;
    throw DataError(origin + ": unknown season '" + name + "'");
}

int day_class_index(const std::string& name, const std::string& origin) {
    if (name == "workday") return 0;
    if (name == "saturday") return 1;
    if (name == "sunday") return 2;
    throw DataError(origin + ": unknown day class '" + name + "'");
}

MonthDay parse_month_day(const std::string& text, const std::string& origin) {
    int m = 0, d = 0;
    if (std::sscanf(text.c_str(), "%d-%d", &m, &d) != 2 || m < 1 || m > 12 || d < 1 || d > 31) {
        throw DataError(origin + ": bad month-day '" + text + "' (expected MM-DD)");
    }
    return {m, d};
}

// Dates compare within one year by (month, day).
bool month_day_leq(const MonthDay& a, int month, int day) {
    return a.month < month || (a.month == month && a.day <= day);
}
bool month_day_geq(const MonthDay& a, int month, int day) {
    return a.month > month || (a.month == month && a.day >= day);
}

}  // namespace

Season ShapeTable::season_of(const CivilDate& date) const {
    // winter wraps the year end
    if (month_day_leq(winter_start, date.month, date.day) ||
        month_day_geq(winter_end, date.month, date.day)) {
        return Season::winter;
    }
    if (month_day_leq(summer_start, date.month, date.day) &&
        month_day_geq(summer_end, date.month, date.day)) {
        return Season::summer;
    }
    return Season::transition;
}

DayClass day_class_of(const CivilDate& date, const HolidayCalendar& calendar) {
    if (calendar.is_holiday(date)) return DayClass::sunday;
    int wd = weekday(date);
    if (wd == 6) return DayClass::sunday;
    if (wd == 5) return DayClass::saturday;
    return DayClass::workday;
}

ShapeTable parse_shape_table(const std::string& csv_text, const std::string& origin) {
    ShapeTable table;
    std::array<std::array<std::array<std::array<bool, 24>, 3>, 3>, 2> seen{};
    std::istringstream in(csv_text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') continue;
        auto fields = split_csv_line(line);
        const std::string ctx = origin + ":" + std::to_string(line_no);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "slp_asset") {
                throw DataError(ctx + ": expected 'slp_asset,<version>' header");
            }
            table.version = fields[1];
            header_seen = true;
            continue;
        }
        if (fields[0] == "dynamization") {
            if (fields.size() != 7) throw DataError(ctx + ": dynamization needs 5 coefficients");
            int p = profile_index(fields[1], ctx);
            for (std::size_t i = 0; i < 5; ++i) {
                table.dynamization[p][i] = parse_number(fields[2 + i], ctx);
            }
        } else if (fields[0] == "season") {
            if (fields.size() != 4) throw DataError(ctx + ": season needs start and end dates");
            MonthDay start = parse_month_day(fields[2], ctx);
            MonthDay end = parse_month_day(fields[3], ctx);
            if (fields[1] == "winter") {
                table.winter_start = start;
                table.winter_end = end;
            } else if (fields[1] == "summer") {
                table.summer_start = start;
                table.summer_end = end;
            } else {
                throw DataError(ctx + ": only winter and summer bands are configurable");
            }
        } else if (fields[0] == "shape") {
            if (fields.size() != 6) {
                throw DataError(ctx + ": expected shape,profile,season,day_class,hour,weight");
            }
            int p = profile_index(fields[1], ctx);
            int s = season_index(fields[2], ctx);
            int d = day_class_index(fields[3], ctx);
            int hour = static_cast<int>(parse_number(fields[4], ctx));
            if (hour < 0 || hour > 23) throw DataError(ctx + ": hour outside 0..23");
            double weight = parse_number(fields[5], ctx);
            if (weight < 0.0) throw DataError(ctx + ": negative shape weight");
            table.weights[p][s][d][static_cast<std::size_t>(hour)] = weight;
            seen[p][s][d][static_cast<std::size_t>(hour)] = true;
        } else {
            throw DataError(ctx + ": unknown record '" + fields[0] + "'");
        }
    }
    if (!header_seen) throw DataError(origin + ": missing slp_asset header");
    for (int p = 0; p < 2; ++p) {
        for (int s = 0; s < 3; ++s) {
            for (int d = 0; d < 3; ++d) {
                for (int h = 0; h < 24; ++h) {
                    if (!seen[p][s][d][h]) {
                        throw DataError(origin + ": incomplete shape table (missing profile " +
                                        std::to_string(p) + ", season " + std::to_string(s) +
                                        ", class " + std::to_string(d) + ", hour " +
                                        std::to_string(h) + ")");
                    }
                }
            }
        }
    }
    return table;
}

ShapeTable load_shape_table(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw DataError("cannot open shape table: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_shape_table(buffer.str(), path);
}

const ShapeTable& default_shape_table() {
    static const ShapeTable table = parse_shape_table(kEmbeddedShapeTableCsv, "<embedded>");
    return table;
}

namespace {

double poly_eval(const std::array<double, 5>& c, double x) {
    return (((c[0] * x + c[1]) * x + c[2]) * x + c[3]) * x + c[4];
}

double poly_year_mean(const std::array<double, 5>& c, int year) {
    int n = days_in_year(year);
    double sum = 0.0;
    for (int d = 0; d < n; ++d) sum += poly_eval(c, static_cast<double>(d));
    return sum / static_cast<double>(n);
}

}  // namespace

double dynamization_factor(const ShapeTable& table, ProfileType profile, const CivilDate& date) {
    const auto& c = table.dynamization[profile == ProfileType::household ? 0 : 1];
    return poly_eval(c, static_cast<double>(day_of_year(date))) / poly_year_mean(c, date.year);
}

LoadSeries generate_profile(const SyntheticSpec& spec, const ShapeTable& table) {
    if (spec.annual_energy_kwh <= 0.0) throw DataError("annual energy must be positive");
    std::int64_t first_day = days_from_civil(spec.start_date);
    std::int64_t end_day = days_from_civil(spec.end_date);
    if (end_day <= first_day) throw DataError("synthetic profile range is empty");

    const int p = spec.profile_type == ProfileType::household ? 0 : 1;

    // Unscaled profile plus per-year raw sums; a second pass applies the
    // per-year factor so every full calendar year hits annual_energy exactly.
    LoadSeries series;
    series.id = std::string("synthetic_") + (p == 0 ? "household" : "commercial");
    series.start = first_day * 24;
    series.values_kw.reserve(static_cast<std::size_t>((end_day - first_day) * 24));

    std::map<int, double> year_mean_cache;
    auto dyn = [&](const CivilDate& date) {
        if (p == 1) return 1.0;  // commercial table keeps a flat polynomial
        const auto& c = table.dynamization[0];
        auto it = year_mean_cache.find(date.year);
        if (it == year_mean_cache.end()) {
            it = year_mean_cache.emplace(date.year, poly_year_mean(c, date.year)).first;
        }
        return poly_eval(c, static_cast<double>(day_of_year(date))) / it->second;
    };

    std::map<int, double> year_raw_sum;
    for (std::int64_t d = first_day; d < end_day; ++d) {
        CivilDate date = civil_from_days(d);
        auto& year_sum = year_raw_sum[date.year];
        if (year_sum == 0.0) {
            // full-year sum, independent of the requested range
            std::int64_t y0 = days_from_civil({date.year, 1, 1});
            std::int64_t y1 = days_from_civil({date.year + 1, 1, 1});
            double sum = 0.0;
            for (std::int64_t yd = y0; yd < y1; ++yd) {
                CivilDate ydate = civil_from_days(yd);
                const auto& shape =
                    table.weights[p][static_cast<int>(table.season_of(ydate))]
                                 [static_cast<int>(day_class_of(ydate, spec.calendar))];
                double day_sum = 0.0;
                for (double w : shape) day_sum += w;
                sum += day_sum * dyn(ydate);
            }
            year_sum = sum;
        }
    }

    for (std::int64_t d = first_day; d < end_day; ++d) {
        CivilDate date = civil_from_days(d);
        double factor = spec.annual_energy_kwh / year_raw_sum[date.year];
        const auto& shape = table.weights[p][static_cast<int>(table.season_of(date))]
                                         [static_cast<int>(day_class_of(date, spec.calendar))];
        double day_factor = factor * dyn(date);
        for (double w : shape) series.values_kw.push_back(w * day_factor);
    }
    return series;
}

LoadSeries generate_profile(const SyntheticSpec& spec) {
    return generate_profile(spec, default_shape_table());
}

}  // namespace loadcast
