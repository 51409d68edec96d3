#include "loadcast/mpc.hpp"

#include <cmath>
#include <fstream>

#include "loadcast/errors.hpp"
#include "loadcast/features.hpp"
#include "loadcast/metrics.hpp"

namespace loadcast {

CostReport simulate_mpc(const Forecaster& forecaster, const MpcInputs& inputs,
                        const BatteryParams& battery) {
    if (inputs.community == nullptr || inputs.weather == nullptr || inputs.calendar == nullptr ||
        inputs.tariff == nullptr) {
        throw UsageError("simulate_mpc: missing inputs");
    }
    const LoadSeries& load = inputs.community->aggregate;
    const PriceSeries& tariff = *inputs.tariff;
    if (!tariff.grid().contains(inputs.split.test.start) ||
        !tariff.grid().contains(inputs.split.test.end - 1)) {
        throw DataError("tariff does not cover the test range");
    }

    // Feature windows for the test days; persistence and the oracle ignore them.
    auto [train_set, test_set] = build_dataset(inputs.split, *inputs.community, *inputs.weather,
                                               *inputs.calendar);

    CostReport report;
    report.forecaster = forecaster.name();
    double nmae_sum = 0.0;

    for (std::size_t w = 0; w < test_set.windows.size(); ++w) {
        const CivilDate day = test_set.windows[w].day;
        const HourStamp day_start = hour_stamp(day, 0);

        ForecastDay context;
        context.day = day;
        context.history = &load;
        context.dataset = &test_set;
        context.window_index = w;

        std::vector<double> forecast(kHoursPerDay), actual(kHoursPerDay), prices(kHoursPerDay);
        auto predicted = forecaster.forecast(context);
        for (std::size_t k = 0; k < kHoursPerDay; ++k) {
            forecast[k] = predicted[k];
            actual[k] = load.at(day_start + static_cast<HourStamp>(k));
            prices[k] = tariff.at(day_start + static_cast<HourStamp>(k));
        }

        DayResult result;
        result.day = day;
        result.forecast_kw = forecast;
        result.actual_kw = actual;
        try {
            MilpInstance instance =
                build_daily_milp(forecast, prices, battery, /*grid_floor_enabled=*/!inputs.perfect_oracle);
            result.schedule = solve_milp(instance);
        } catch (const Error& e) {
            throw SolveError("dispatch failed on " + format_date(day) + ": " + e.what());
        }
        result.realized_cost_eur = realized_cost(result.schedule, actual, prices);
        for (std::size_t k = 0; k < kHoursPerDay; ++k) {
            result.unoptimized_cost_eur += actual[k] * prices[k];
        }
        result.nmae_pct = nmae(forecast, actual);
        nmae_sum += result.nmae_pct;

        report.total_unoptimized_eur += result.unoptimized_cost_eur;
        report.total_optimized_eur += result.realized_cost_eur;
        report.days.push_back(std::move(result));
    }
    if (report.days.empty()) throw DataError("test range holds no days");

    report.savings_eur = report.total_unoptimized_eur - report.total_optimized_eur;
    report.savings_pct = report.total_unoptimized_eur > 0.0
                             ? report.savings_eur / report.total_unoptimized_eur * 100.0
                             : 0.0;
    report.mean_daily_nmae_pct = nmae_sum / static_cast<double>(report.days.size());
    return report;
}

void write_schedule_csv(const std::string& path, const CostReport& report,
                        const PriceSeries& tariff) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create file: " + path);
    out << "date,hour,p_ch_kw,p_dis_kw,p_grid_kw,energy_kwh,price_eur_per_kwh,forecast_kw,actual_kw\n";
    char buf[256];
    for (const DayResult& day : report.days) {
        const HourStamp day_start = hour_stamp(day.day, 0);
        for (std::size_t k = 0; k < day.forecast_kw.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.8f,%.6f,%.6f",
                          format_date(day.day).c_str(), k, day.schedule.p_ch_kw[k],
                          day.schedule.p_dis_kw[k], day.schedule.p_grid_kw[k],
                          day.schedule.energy_kwh[k],
                          tariff.at(day_start + static_cast<HourStamp>(k)), day.forecast_kw[k],
                          day.actual_kw[k]);
            out << buf << '\n';
        }
    }
}

void write_cost_report_json(const std::string& path, const CostReport& report) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create file: " + path);
    char buf[256];
    out << "{\n  \"forecaster\": \"" << report.forecaster << "\",\n";
    std::snprintf(buf, sizeof(buf),
                  "  \"total_unoptimized_eur\": %.6f,\n  \"total_optimized_eur\": %.6f,\n"
                  "  \"savings_eur\": %.6f,\n  \"savings_pct\": %.4f,\n"
                  "  \"mean_daily_nmae_pct\": %.4f,\n",
                  report.total_unoptimized_eur, report.total_optimized_eur, report.savings_eur,
                  report.savings_pct, report.mean_daily_nmae_pct);
    out << buf;
    out << "  \"days\": [\n";
    for (std::size_t i = 0; i < report.days.size(); ++i) {
        const DayResult& d = report.days[i];
        std::snprintf(buf, sizeof(buf),
                      "    {\"date\": \"%s\", \"unoptimized_eur\": %.6f, \"realized_eur\": %.6f, "
                      "\"nmae_pct\": %.4f}%s\n",
                      format_date(d.day).c_str(), d.unoptimized_cost_eur, d.realized_cost_eur,
                      d.nmae_pct, i + 1 < report.days.size() ? "," : "");
        out << buf;
    }
    out << "  ]\n}\n";
}

}  // namespace loadcast
