#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "loadcast/calendar.hpp"
#include "loadcast/dispatch.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/forecaster.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/presets.hpp"
#include "loadcast/synthgen.hpp"
#include "loadcast/tariff.hpp"

namespace py = pybind11;
using namespace loadcast;

namespace {

BatteryParams battery_from_dict(const py::dict& d) {
    BatteryParams b;
    b.e_max_kwh = d["e_max_kwh"].cast<double>();
    b.e_min_kwh = d.contains("e_min_kwh") ? d["e_min_kwh"].cast<double>() : 0.0;
    b.p_max_kw = d["p_max_kw"].cast<double>();
    b.eta_ch = d.contains("eta_ch") ? d["eta_ch"].cast<double>() : 0.922;
    b.eta_dis = d.contains("eta_dis") ? d["eta_dis"].cast<double>() : 0.922;
    b.e_start_kwh = d["e_start_kwh"].cast<double>();
    b.e_end_kwh = d["e_end_kwh"].cast<double>();
    return b;
}

py::dict battery_to_dict(const BatteryParams& b) {
    py::dict d;
    d["e_max_kwh"] = b.e_max_kwh;
    d["e_min_kwh"] = b.e_min_kwh;
    d["p_max_kw"] = b.p_max_kw;
    d["eta_ch"] = b.eta_ch;
    d["eta_dis"] = b.eta_dis;
    d["e_start_kwh"] = b.e_start_kwh;
    d["e_end_kwh"] = b.e_end_kwh;
    return d;
}

py::dict schedule_to_dict(const DispatchSchedule& s) {
    py::dict d;
    d["p_ch_kw"] = s.p_ch_kw;
    d["p_dis_kw"] = s.p_dis_kw;
    d["p_grid_kw"] = s.p_grid_kw;
    d["energy_kwh"] = s.energy_kwh;
    d["b_ch"] = s.b_ch;
    d["b_dis"] = s.b_dis;
    d["objective_eur"] = s.objective_eur;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Load forecasting and community battery dispatch core";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SolveError>(m, "SolveError", PyExc_RuntimeError);

    m.def("nmae", [](const std::vector<double>& forecast, const std::vector<double>& actual) {
        return nmae(forecast, actual);
    },
          py::arg("forecast"), py::arg("actual"),
          "Normalized mean absolute error in percent: 100 * MAE / mean(actual).");

    m.def("mean_absolute_error", &mean_absolute_error, py::arg("forecast"), py::arg("actual"));

    m.def(
        "generate_profile",
        [](const std::string& profile_type, const std::string& start, const std::string& end,
           double annual_energy_kwh, const std::vector<std::string>& holidays) {
            SyntheticSpec spec;
            if (profile_type == "household") {
                spec.profile_type = ProfileType::household;
            } else if (profile_type == "commercial") {
                spec.profile_type = ProfileType::commercial;
            } else {
                throw UsageError("profile_type must be household or commercial");
            }
            spec.start_date = parse_date(start);
            spec.end_date = parse_date(end);
            spec.annual_energy_kwh = annual_energy_kwh;
            for (const auto& h : holidays) spec.calendar.dates.insert(parse_date(h));
            LoadSeries series = generate_profile(spec);
            py::dict out;
            out["start"] = format_hour(series.start);
            out["values_kw"] = series.values_kw;
            return out;
        },
        py::arg("profile_type"), py::arg("start"), py::arg("end"), py::arg("annual_energy_kwh"),
        py::arg("holidays") = std::vector<std::string>{},
        "Hourly synthetic standard load profile over [start, end).");

    m.def(
        "synthetic_tariff",
        [](const std::string& start, std::size_t hours, double base, double amplitude,
           double phase_hours, double noise_sd, std::uint64_t seed, double network_fee,
           double tax_rate) {
            SyntheticSpotSpec spec{base, amplitude, phase_hours, noise_sd, seed};
            CivilDate d = parse_date(start);
            PriceSeries p = build_tariff(spec, hour_stamp(d, 0), hours, network_fee, tax_rate);
            return p.eur_per_kwh;
        },
        py::arg("start"), py::arg("hours"), py::arg("base") = 0.10, py::arg("amplitude") = 0.05,
        py::arg("phase_hours") = 9.0, py::arg("noise_sd") = 0.005, py::arg("seed") = 0,
        py::arg("network_fee") = 0.05, py::arg("tax_rate") = 0.20,
        "Real-time tariff built from a synthetic spot index: (spot + fee) * (1 + tax).");

    m.def(
        "persistence_forecast",
        [](const std::vector<double>& values_kw, const std::string& series_start,
           const std::string& day) {
            LoadSeries history;
            history.id = "history";
            history.start = hour_stamp(parse_date(series_start), 0);
            history.values_kw = values_kw;
            auto out = persistence_forecast(history, parse_date(day));
            return std::vector<double>(out.begin(), out.end());
        },
        py::arg("values_kw"), py::arg("series_start"), py::arg("day"),
        "Day-ahead forecast equal to the load one week earlier.");

    m.def("build_battery",
          [](const std::string& scheme, double value) {
              BatteryScheme s = scheme == "per_household" ? BatteryScheme::per_household
                                                          : BatteryScheme::fixed_capacity;
              return battery_to_dict(build_battery(s, value));
          },
          py::arg("scheme"), py::arg("value"),
          "Battery sizing: scheme 'per_household' (12 kWh each) or 'capacity' (kWh).");

    m.def(
        "solve_daily_dispatch",
        [](const std::vector<double>& forecast_kw, const std::vector<double>& prices,
           const py::dict& battery, bool grid_floor_enabled) {
            MilpInstance instance = build_daily_milp(forecast_kw, prices,
                                                     battery_from_dict(battery),
                                                     grid_floor_enabled);
            return schedule_to_dict(solve_milp(instance));
        },
        py::arg("forecast_kw"), py::arg("prices"), py::arg("battery"),
        py::arg("grid_floor_enabled") = true,
        "Cost-optimal daily battery schedule for a 24-value forecast and tariff.");

    m.def(
        "realized_cost",
        [](const py::dict& schedule, const std::vector<double>& actual_kw,
           const std::vector<double>& prices) {
            DispatchSchedule s;
            s.p_ch_kw = schedule["p_ch_kw"].cast<std::vector<double>>();
            s.p_dis_kw = schedule["p_dis_kw"].cast<std::vector<double>>();
            return realized_cost(s, actual_kw, prices);
        },
        py::arg("schedule"), py::arg("actual_kw"), py::arg("prices"),
        "Settlement of a planned schedule against the realized load (feed-in uncompensated).");

    m.def("deep_presets", [] {
        py::list out;
        for (const ModelPreset& p : all_deep_presets()) {
            py::dict d;
            d["family"] = family_name(p.family);
            d["size_class"] = size_class_name(p.size_class);
            d["param_count"] = count_params(p);
            out.append(d);
        }
        return out;
    },
          "All deep model presets with their exact parameter counts.");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
