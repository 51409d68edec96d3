#pragma once

#include <string>
#include <vector>

#include "loadcast/dispatch.hpp"
#include "loadcast/forecaster.hpp"
#include "loadcast/series.hpp"
#include "loadcast/split.hpp"

namespace loadcast {

struct DayResult {
    CivilDate day;
    DispatchSchedule schedule;
    std::vector<double> forecast_kw;
    std::vector<double> actual_kw;
    double unoptimized_cost_eur = 0.0;
    double realized_cost_eur = 0.0;
    double nmae_pct = 0.0;
};

struct CostReport {
    std::string forecaster;
    std::vector<DayResult> days;
    double total_unoptimized_eur = 0.0;
    double total_optimized_eur = 0.0;
    double savings_eur = 0.0;
    double savings_pct = 0.0;
    double mean_daily_nmae_pct = 0.0;
};

struct MpcInputs {
    const CommunityProfile* community = nullptr;
    const WeatherSeries* weather = nullptr;
    const HolidayCalendar* calendar = nullptr;
    const PriceSeries* tariff = nullptr;
    DataSplit split;
    bool perfect_oracle = false;  // floor off and realized load as the forecast
};

// Day-by-day dispatch over the test range: forecast 24 h, solve the daily
// problem (grid floor on, except in perfect-oracle mode), settle against the
// realized load. Days are independent (E_start = E_end).
CostReport simulate_mpc(const Forecaster& forecaster, const MpcInputs& inputs,
                        const BatteryParams& battery);

void write_schedule_csv(const std::string& path, const CostReport& report,
                        const PriceSeries& tariff);
void write_cost_report_json(const std::string& path, const CostReport& report);

}  // namespace loadcast
