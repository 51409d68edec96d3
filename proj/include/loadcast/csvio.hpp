#pragma once

#include <string>
#include <vector>

#include "loadcast/series.hpp"

namespace loadcast {

enum class SourceResolution { minutes_30, minutes_60 };

struct IngestWarning {
    std::string household_id;
    std::string reason;
};

struct IngestResult {
    std::vector<LoadSeries> accepted;
    std::vector<IngestWarning> rejected;
};

// Reads a smart-meter CSV with columns (household_id,timestamp,energy_kWh).
// Sub-hourly energies are summed into hourly energy and expressed as mean
// power in kW. Gaps of at most max_gap_hours are forward-filled with the last
// observed value; households with longer gaps are rejected with a warning.
IngestResult load_smart_meter(const std::string& path, SourceResolution resolution,
                              int max_gap_hours = 3);

// (timestamp, temperature_c, dew_point_c, wind_direction_deg, wind_speed_kmh,
//  pressure_hpa, humidity_pct); hourly, gap-free.
WeatherSeries load_weather(const std::string& path);

// One "YYYY-MM-DD" per line, optional "date" header.
HolidayCalendar load_holidays(const std::string& path, const std::string& region = "");

// (timestamp, price_eur_per_kwh); hourly, gap-free.
PriceSeries load_prices(const std::string& path);

void write_load_series(const std::string& path, const LoadSeries& series);
void write_price_series(const std::string& path, const PriceSeries& series);

// Low-level helpers shared by the readers.
std::vector<std::string> split_csv_line(const std::string& line);
double parse_number(const std::string& field, const std::string& context);

}  // namespace loadcast
