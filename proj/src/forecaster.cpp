#include "loadcast/forecaster.hpp"

#include "loadcast/errors.hpp"

namespace loadcast {

std::array<double, kHoursPerDay> persistence_forecast(const LoadSeries& history,
                                                      const CivilDate& day) {
    const HourStamp day_start = hour_stamp(day, 0);
    if (!history.grid().contains(day_start - 168)) {
        throw DataError("persistence forecast for " + format_date(day) +
                        " needs history back to " + format_hour(day_start - 168));
    }
    std::array<double, kHoursPerDay> out{};
    for (std::size_t k = 0; k < kHoursPerDay; ++k) {
        out[k] = history.at(day_start - 168 + static_cast<HourStamp>(k));
    }
    return out;
}

std::array<double, kHoursPerDay> PerfectForecaster::forecast(const ForecastDay& day) const {
    const HourStamp day_start = hour_stamp(day.day, 0);
    if (day.history == nullptr || !day.history->grid().contains(day_start + 23)) {
        throw DataError("perfect forecast needs the realized load for " + format_date(day.day));
    }
    std::array<double, kHoursPerDay> out{};
    for (std::size_t k = 0; k < kHoursPerDay; ++k) {
        out[k] = day.history->at(day_start + static_cast<HourStamp>(k));
    }
    return out;
}

}  // namespace loadcast
