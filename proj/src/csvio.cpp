#include "loadcast/csvio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "loadcast/errors.hpp"

namespace loadcast {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace and stray CR from windows line endings
        std::size_t b = field.find_first_not_of(" \t\r");
        std::size_t e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& field, const std::string& context) {
    try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw DataError(context + ": cannot parse number '" + field + "'");
    }
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw DataError("cannot open file: " + path);
    return in;
}

bool looks_like_header(const std::vector<std::string>& fields) {
    if (fields.empty()) return false;
    std::string lower;
    for (const auto& f : fields) {
        for (char c : f) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        lower += ',';
    }
    return lower.find("timestamp") != std::string::npos || lower.find("date") != std::string::npos ||
           lower.find("household") != std::string::npos || lower.find("price") != std::string::npos;
}

std::string line_context(const std::string& path, std::size_t line_no) {
    return path + ":" + std::to_string(line_no);
}

// Timestamp of a reading in half-hour ticks since epoch, so both source
// resolutions share one key space.
std::int64_t half_hour_tick(const CivilDateTime& t, SourceResolution res,
                            const std::string& context) {
    HourStamp hour = hour_stamp(t.date, t.hour);
    if (t.second != 0) throw DataError(context + ": timestamps must fall on whole minutes");
    if (res == SourceResolution::minutes_60) {
        if (t.minute != 0) throw DataError(context + ": expected whole-hour timestamp");
        return hour * 2;
    }
    if (t.minute != 0 && t.minute != 30) {
        throw DataError(context + ": expected :00 or :30 timestamp for 30-minute data");
    }
    return hour * 2 + (t.minute == 30 ? 1 : 0);
}

}  // namespace

IngestResult load_smart_meter(const std::string& path, SourceResolution resolution,
                              int max_gap_hours) {
    auto in = open_or_throw(path);

    // Per-household map of half-hour tick -> energy kWh. std::map keeps the
    // ticks sorted, which drives gap detection below.
    std::map<std::string, std::map<std::int64_t, double>> readings;
    std::vector<std::string> order;  // first-seen household order

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && looks_like_header(fields)) continue;
        const std::string ctx = line_context(path, line_no);
        if (fields.size() != 3) {
            throw DataError(ctx + ": expected 3 columns (household_id,timestamp,energy_kWh), got " +
                            std::to_string(fields.size()));
        }
        const std::string& id = fields[0];
        if (id.empty()) throw DataError(ctx + ": empty household_id");
        CivilDateTime t = parse_datetime(fields[1]);
        std::int64_t tick = half_hour_tick(t, resolution, ctx);
        double energy = parse_number(fields[2], ctx);
        auto& per_household = readings[id];
        if (per_household.empty()) order.push_back(id);
        auto [it, inserted] = per_household.emplace(tick, energy);
        if (!inserted) {
            throw DataError(ctx + ": duplicate timestamp " + fields[1] + " for household '" + id +
                            "'");
        }
    }
    if (readings.empty()) throw DataError(path + ": no data rows");

    IngestResult result;
    for (const std::string& id : order) {
        const auto& ticks = readings[id];
        HourStamp first_hour = ticks.begin()->first / 2;
        HourStamp last_hour = ticks.rbegin()->first / 2;

        // Sum available readings into hourly energy buckets.
        std::size_t n_hours = static_cast<std::size_t>(last_hour - first_hour + 1);
        std::vector<double> energy(n_hours, 0.0);
        std::vector<bool> seen(n_hours, false);
        for (const auto& [tick, kwh] : ticks) {
            std::size_t i = static_cast<std::size_t>(tick / 2 - first_hour);
            energy[i] += kwh;
            seen[i] = true;
        }

        // Forward-fill short gaps; reject households with longer ones.
        bool rejected = false;
        int gap = 0;
        for (std::size_t i = 0; i < n_hours && !rejected; ++i) {
            if (seen[i]) {
                gap = 0;
                continue;
            }
            if (++gap > max_gap_hours) {
                result.rejected.push_back(
                    {id, "gap longer than " + std::to_string(max_gap_hours) + " h at " +
                             format_hour(first_hour + static_cast<HourStamp>(i))});
                rejected = true;
                break;
            }
            energy[i] = energy[i - 1];  // i > 0: the first hour always has a reading
        }
        if (rejected) continue;

        LoadSeries series;
        series.id = id;
        series.start = first_hour;
        series.values_kw = std::move(energy);  // kWh over 1 h == mean kW
        for (double v : series.values_kw) {
            if (v < 0.0) throw DataError(path + ": negative energy for household '" + id + "'");
        }
        result.accepted.push_back(std::move(series));
    }
    return result;
}

WeatherSeries load_weather(const std::string& path) {
    auto in = open_or_throw(path);
    WeatherSeries series;
    std::string line;
    std::size_t line_no = 0;
    HourStamp expected = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && looks_like_header(fields)) continue;
        const std::string ctx = line_context(path, line_no);
        if (fields.size() != 1 + kWeatherColumns) {
            throw DataError(ctx + ": expected timestamp plus " + std::to_string(kWeatherColumns) +
                            " weather columns");
        }
        CivilDateTime t = parse_datetime(fields[0]);
        if (t.minute != 0 || t.second != 0) throw DataError(ctx + ": expected whole-hour timestamp");
        HourStamp h = hour_stamp(t.date, t.hour);
        if (series.rows.empty()) {
            series.start = h;
        } else if (h != expected) {
            throw DataError(ctx + ": weather timestamps must be contiguous hourly (expected " +
                            format_hour(expected) + ")");
        }
        expected = h + 1;
        std::array<double, kWeatherColumns> row{};
        for (std::size_t c = 0; c < kWeatherColumns; ++c) {
            row[c] = parse_number(fields[c + 1], ctx);
        }
        double humidity = row[5];
        if (humidity < 0.0 || humidity > 100.0) {
            throw DataError(ctx + ": relative humidity outside [0, 100]");
        }
        series.rows.push_back(row);
    }
    if (series.rows.empty()) throw DataError(path + ": no data rows");
    return series;
}

HolidayCalendar load_holidays(const std::string& path, const std::string& region) {
    auto in = open_or_throw(path);
    HolidayCalendar cal;
    cal.region = region;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && looks_like_header(fields)) continue;
        if (fields.size() != 1) {
            throw DataError(line_context(path, line_no) + ": expected one date per line");
        }
        CivilDate d = parse_date(fields[0]);
        if (!cal.dates.insert(d).second) {
            throw DataError(line_context(path, line_no) + ": duplicate holiday " + fields[0]);
        }
    }
    return cal;
}

PriceSeries load_prices(const std::string& path) {
    auto in = open_or_throw(path);
    PriceSeries series;
    std::string line;
    std::size_t line_no = 0;
    HourStamp expected = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && looks_like_header(fields)) continue;
        const std::string ctx = line_context(path, line_no);
        if (fields.size() != 2) throw DataError(ctx + ": expected (timestamp,price_eur_per_kwh)");
        CivilDateTime t = parse_datetime(fields[0]);
        if (t.minute != 0 || t.second != 0) throw DataError(ctx + ": expected whole-hour timestamp");
        HourStamp h = hour_stamp(t.date, t.hour);
        if (series.eur_per_kwh.empty()) {
            series.start = h;
        } else if (h != expected) {
            throw DataError(ctx + ": price timestamps must be contiguous hourly (expected " +
                            format_hour(expected) + ")");
        }
        expected = h + 1;
        double price = parse_number(fields[1], ctx);
        if (!std::isfinite(price)) throw DataError(ctx + ": price must be finite");
        series.eur_per_kwh.push_back(price);
    }
    if (series.eur_per_kwh.empty()) throw DataError(path + ": no data rows");
    return series;
}

namespace {

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create file: " + path);
    return out;
}

}  // namespace

void write_load_series(const std::string& path, const LoadSeries& series) {
    auto out = create_or_throw(path);
    out << "household_id,timestamp,energy_kWh\n";
    char buf[64];
    for (std::size_t i = 0; i < series.values_kw.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", series.values_kw[i]);
        out << series.id << ',' << format_hour(series.start + static_cast<HourStamp>(i)) << ','
            << buf << '\n';
    }
}

void write_price_series(const std::string& path, const PriceSeries& series) {
    auto out = create_or_throw(path);
    out << "timestamp,price_eur_per_kwh\n";
    char buf[64];
    for (std::size_t i = 0; i < series.eur_per_kwh.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.8f", series.eur_per_kwh[i]);
        out << format_hour(series.start + static_cast<HourStamp>(i)) << ',' << buf << '\n';
    }
}

}  // namespace loadcast
