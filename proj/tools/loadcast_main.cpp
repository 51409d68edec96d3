#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "loadcast/checkpoint.hpp"
#include "loadcast/community.hpp"
#include "loadcast/csvio.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/harness.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/mpc.hpp"
#include "loadcast/synthgen.hpp"
#include "loadcast/tariff.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace loadcast;

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

// ---------------------------------------------------------------------------
// config document
// ---------------------------------------------------------------------------

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"", {"seed", "out", "threads", "data", "tariff", "split", "model", "train", "community",
          "grid", "battery", "synth", "dispatch"}},
    {"data", {"loads_csv", "source_resolution", "weather_csv", "holidays_csv", "prices_csv",
              "synthetic"}},
    {"data.synthetic", {"households", "start", "end", "annual_kwh_min", "annual_kwh_max",
                        "noise_sd", "weather_coupling_kw_per_degc", "t_ref_c"}},
    {"tariff", {"network_fee_eur_per_kwh", "tax_rate", "synthetic_spot"}},
    {"tariff.synthetic_spot", {"base", "amplitude", "phase_hours", "noise_sd"}},
    {"split", {"test_quarter", "test_year", "train_months"}},
    {"model", {"family", "size_class", "transfer_learning", "knn_k"}},
    {"train", {"epochs", "batch_size", "lr_stages"}},
    {"community", {"size", "repetition"}},
    {"grid", {"baseline_community", "baseline_train_months", "baseline_size", "baseline_quarter",
              "baseline_transfer", "test_year", "community_axis", "train_axis", "size_axis",
              "transfer_axis", "quarter_axis", "repetitions", "families"}},
    {"battery", {"scheme", "households", "capacity_kwh"}},
    {"synth", {"profile_type", "start", "end", "annual_energy_kwh"}},
    {"dispatch", {"forecasters"}},
};

void reject_unknown_keys(const json& node, const std::string& path) {
    if (!node.is_object()) return;
    auto it = kKnownKeys.find(path);
    if (it == kKnownKeys.end()) return;
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (const auto& k : it->second) {
            if (k == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw UsageError("config: unknown key '" + (path.empty() ? key : path + "." + key) +
                             "'");
        }
        reject_unknown_keys(value, path.empty() ? key : path + "." + key);
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in.is_open()) throw UsageError("cannot open config: " + path);
    json config;
    try {
        in >> config;
    } catch (const json::exception& e) {
        throw UsageError("config parse error in " + path + ": " + e.what());
    }
    if (!config.is_object()) throw UsageError("config root must be a JSON object");
    reject_unknown_keys(config, "");
    return config;
}

template <typename T>
T get_or(const json& node, const std::string& key, T fallback) {
    if (!node.is_object() || !node.contains(key)) return fallback;
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError("config: bad value for '" + key + "': " + e.what());
    }
}

Quarter quarter_from_string(const std::string& text) {
    if (text == "Q1" || text == "q1") return Quarter::q1;
    if (text == "Q2" || text == "q2") return Quarter::q2;
    if (text == "Q3" || text == "q3") return Quarter::q3;
    if (text == "Q4" || text == "q4") return Quarter::q4;
    throw UsageError("bad quarter '" + text + "' (expected Q1..Q4)");
}

// ---------------------------------------------------------------------------
// shared run context
// ---------------------------------------------------------------------------

struct RunPaths {
    fs::path out;

    fs::path file(const std::string& name) const { return out / name; }
};

RunPaths prepare_out(const std::string& out, const json& config, const std::string& command,
                     std::uint64_t seed) {
    if (out.empty()) throw UsageError("--out (or config key 'out') is required");
    RunPaths paths{fs::path(out)};
    fs::create_directories(paths.out);
    // manifest first: config + seed fully determine the run
    json manifest;
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["config"] = config;
    std::ofstream m(paths.file("manifest.json"));
    m << manifest.dump(2) << '\n';
    return paths;
}

struct LoadedData {
    std::vector<LoadSeries> pool;
    WeatherSeries weather;
    HolidayCalendar calendar;
    PriceSeries tariff;
};

// Pool, weather, calendar, and tariff from files when configured, otherwise
// synthetic sources derived from the seed.
LoadedData load_data(const json& config, std::uint64_t seed, bool need_tariff) {
    LoadedData data;
    const json data_cfg = config.value("data", json::object());

    CivilDate synth_start{2012, 7, 1};
    CivilDate synth_end{2014, 3, 1};
    const json synth_cfg = data_cfg.value("synthetic", json::object());
    if (synth_cfg.contains("start")) synth_start = parse_date(synth_cfg.at("start").get<std::string>());
    if (synth_cfg.contains("end")) synth_end = parse_date(synth_cfg.at("end").get<std::string>());

    if (data_cfg.contains("holidays_csv")) {
        data.calendar = load_holidays(data_cfg.at("holidays_csv").get<std::string>());
    }

    if (data_cfg.contains("weather_csv")) {
        data.weather = load_weather(data_cfg.at("weather_csv").get<std::string>());
    } else {
        data.weather = make_synthetic_weather(synth_start, synth_end, seed ^ 0x77eaULL);
    }

    if (data_cfg.contains("loads_csv")) {
        std::string res = get_or<std::string>(data_cfg, "source_resolution", "60min");
        SourceResolution resolution;
        if (res == "30min") {
            resolution = SourceResolution::minutes_30;
        } else if (res == "60min") {
            resolution = SourceResolution::minutes_60;
        } else {
            throw UsageError("data.source_resolution must be 30min or 60min");
        }
        IngestResult ingest = load_smart_meter(data_cfg.at("loads_csv").get<std::string>(),
                                               resolution);
        data.pool = std::move(ingest.accepted);
        for (const auto& warning : ingest.rejected) {
            std::cerr << "warning: rejected household " << warning.household_id << ": "
                      << warning.reason << '\n';
        }
    } else {
        SyntheticPoolSpec spec;
        spec.households = get_or<std::size_t>(synth_cfg, "households", 120);
        spec.start = synth_start;
        spec.end = synth_end;
        spec.annual_kwh_min = get_or<double>(synth_cfg, "annual_kwh_min", 2000.0);
        spec.annual_kwh_max = get_or<double>(synth_cfg, "annual_kwh_max", 6000.0);
        spec.noise_sd = get_or<double>(synth_cfg, "noise_sd", 0.20);
        spec.weather_coupling_kw_per_degc =
            get_or<double>(synth_cfg, "weather_coupling_kw_per_degc", 0.0);
        spec.t_ref_c = get_or<double>(synth_cfg, "t_ref_c", 16.0);
        spec.seed = seed ^ 0x9001ULL;
        data.pool = make_synthetic_pool(spec, data.weather, data.calendar);
    }

    if (need_tariff) {
        const json tariff_cfg = config.value("tariff", json::object());
        double fee = get_or<double>(tariff_cfg, "network_fee_eur_per_kwh", 0.05);
        double tax = get_or<double>(tariff_cfg, "tax_rate", 0.20);
        if (config.value("data", json::object()).contains("prices_csv")) {
            PriceSeries spot = load_prices(data_cfg.at("prices_csv").get<std::string>());
            data.tariff = build_tariff(spot, fee, tax);
        } else {
            const json spot_cfg = tariff_cfg.value("synthetic_spot", json::object());
            SyntheticSpotSpec spec;
            spec.base_eur_per_kwh = get_or<double>(spot_cfg, "base", 0.10);
            spec.amplitude = get_or<double>(spot_cfg, "amplitude", 0.05);
            spec.phase_hours = get_or<double>(spot_cfg, "phase_hours", 9.0);
            spec.noise_sd = get_or<double>(spot_cfg, "noise_sd", 0.005);
            spec.seed = seed ^ 0x7a41ULL;
            HourStamp start = hour_stamp(synth_start, 0);
            std::size_t hours = static_cast<std::size_t>(hour_stamp(synth_end, 0) - start);
            data.tariff = build_tariff(spec, start, hours, fee, tax);
        }
    }
    return data;
}

DataSplit split_from_config(const json& config, const HourlyGrid& coverage) {
    const json split_cfg = config.value("split", json::object());
    Quarter quarter = quarter_from_string(get_or<std::string>(split_cfg, "test_quarter", "Q4"));
    int year = get_or<int>(split_cfg, "test_year", 2013);
    int months = get_or<int>(split_cfg, "train_months", 12);
    return make_split(coverage, quarter, year, months);
}

TrainConfig train_from_config(const json& config, std::uint64_t seed) {
    const json train_cfg = config.value("train", json::object());
    TrainConfig tc;
    tc.epochs = get_or<int>(train_cfg, "epochs", 100);
    tc.batch_size = get_or<std::size_t>(train_cfg, "batch_size", 256);
    if (train_cfg.contains("lr_stages")) {
        auto stages = train_cfg.at("lr_stages").get<std::vector<double>>();
        if (stages.size() != 4) throw UsageError("train.lr_stages must list 4 learning rates");
        std::copy(stages.begin(), stages.end(), tc.lr_stages.begin());
    }
    tc.seed = seed;
    return tc;
}

BatteryParams battery_from_config(const json& config, std::size_t community_size) {
    const json battery_cfg = config.value("battery", json::object());
    std::string scheme = get_or<std::string>(battery_cfg, "scheme", "per_household");
    if (scheme == "per_household") {
        double h = get_or<double>(battery_cfg, "households",
                                  static_cast<double>(community_size));
        return build_battery(BatteryScheme::per_household, h);
    }
    if (scheme == "capacity") {
        if (!battery_cfg.contains("capacity_kwh")) {
            throw UsageError("battery.scheme=capacity needs battery.capacity_kwh");
        }
        return build_battery(BatteryScheme::fixed_capacity,
                             battery_cfg.at("capacity_kwh").get<double>());
    }
    throw UsageError("battery.scheme must be per_household or capacity");
}

CommunityProfile pick_community(const LoadedData& data, const json& config, std::uint64_t seed) {
    const json community_cfg = config.value("community", json::object());
    std::size_t size = get_or<std::size_t>(community_cfg, "size", 10);
    std::size_t repetition = get_or<std::size_t>(community_cfg, "repetition", 0);
    auto communities = sample_communities(data.pool, size, repetition + 1, seed ^ 0xc011ULL);
    return communities[repetition];
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_ingest(const json& config, std::uint64_t seed, const std::string& out) {
    const json data_cfg = config.value("data", json::object());
    if (!data_cfg.contains("loads_csv")) throw UsageError("ingest needs data.loads_csv");
    RunPaths paths = prepare_out(out, config, "ingest", seed);

    std::string res = get_or<std::string>(data_cfg, "source_resolution", "60min");
    SourceResolution resolution =
        res == "30min" ? SourceResolution::minutes_30 : SourceResolution::minutes_60;
    IngestResult result = load_smart_meter(data_cfg.at("loads_csv").get<std::string>(), resolution);

    fs::create_directories(paths.file("loads"));
    for (const LoadSeries& series : result.accepted) {
        write_load_series(paths.file("loads").string() + "/" + series.id + ".csv", series);
    }
    {
        std::ofstream warn(paths.file("warnings.csv"));
        warn << "household_id,reason\n";
        for (const auto& w : result.rejected) warn << w.household_id << ',' << w.reason << '\n';
    }
    if (data_cfg.contains("weather_csv")) {
        load_weather(data_cfg.at("weather_csv").get<std::string>());
    }
    if (data_cfg.contains("prices_csv")) {
        load_prices(data_cfg.at("prices_csv").get<std::string>());
    }
    std::cout << "accepted " << result.accepted.size() << " households, rejected "
              << result.rejected.size() << '\n';
    return 0;
}

int cmd_synth(const json& config, std::uint64_t seed, const std::string& out) {
    RunPaths paths = prepare_out(out, config, "synth", seed);
    const json synth_cfg = config.value("synth", json::object());
    SyntheticSpec spec;
    std::string type = get_or<std::string>(synth_cfg, "profile_type", "household");
    if (type == "household") {
        spec.profile_type = ProfileType::household;
    } else if (type == "commercial") {
        spec.profile_type = ProfileType::commercial;
    } else {
        throw UsageError("synth.profile_type must be household or commercial");
    }
    spec.start_date = parse_date(get_or<std::string>(synth_cfg, "start", "2013-01-01"));
    spec.end_date = parse_date(get_or<std::string>(synth_cfg, "end", "2014-01-01"));
    spec.annual_energy_kwh = get_or<double>(synth_cfg, "annual_energy_kwh", 3500.0);
    const json data_cfg = config.value("data", json::object());
    if (data_cfg.contains("holidays_csv")) {
        spec.calendar = load_holidays(data_cfg.at("holidays_csv").get<std::string>());
    }
    LoadSeries series = generate_profile(spec);
    write_load_series(paths.file("profile.csv").string(), series);
    std::cout << "wrote " << series.values_kw.size() << " hourly values, "
              << series.total_kwh() << " kWh total\n";
    return 0;
}

int cmd_train(const json& config, std::uint64_t seed, const std::string& out) {
    RunPaths paths = prepare_out(out, config, "train", seed);
    LoadedData data = load_data(config, seed, /*need_tariff=*/false);
    CommunityProfile community = pick_community(data, config, seed);
    DataSplit split = split_from_config(config, community.aggregate.grid());
    auto [train_set, test_set] = build_dataset(split, community, data.weather, data.calendar);

    const json model_cfg = config.value("model", json::object());
    ModelFamily family = family_from_name(get_or<std::string>(model_cfg, "family", "lstm"));
    if (family == ModelFamily::persistence || family == ModelFamily::knn) {
        throw UsageError("train applies to deep families only (persistence and knn need no fit)");
    }
    SizeClass size = size_class_from_name(get_or<std::string>(model_cfg, "size_class", "5k"));
    bool transfer = get_or<bool>(model_cfg, "transfer_learning", false);

    auto model = make_deep_model(preset_for(family, size), seed);
    TrainConfig tc = train_from_config(config, seed);
    TrainResult result;
    if (transfer) {
        double train_mean = 0.0;
        for (std::size_t i = 0; i < split.train.hours(); ++i) {
            train_mean += community.aggregate.at(split.train.start + static_cast<HourStamp>(i));
        }
        train_mean /= static_cast<double>(split.train.hours());
        SyntheticSpec synth_spec;
        synth_spec.profile_type = ProfileType::household;
        synth_spec.start_date = date_of(community.aggregate.start + 23);
        synth_spec.end_date = date_of(community.aggregate.grid().end());
        synth_spec.annual_energy_kwh = std::max(1.0, train_mean * 8760.0);
        synth_spec.calendar = data.calendar;
        LoadSeries synth = generate_profile(synth_spec);
        HourRange range{hour_stamp(synth_spec.start_date, 0), hour_stamp(synth_spec.end_date, 0)};
        Dataset synth_set = build_range_dataset(synth, data.weather, data.calendar, range, 21);
        result = pretrain_finetune(*model, synth_set, train_set, tc);
    } else {
        result = train(*model, train_set, tc);
    }

    save_checkpoint(paths.file("checkpoint.csv").string(), *model);
    {
        std::ofstream curve(paths.file("loss_curve.csv"));
        curve << "epoch,train_mae_kw\n";
        char buf[48];
        for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
            std::snprintf(buf, sizeof(buf), "%zu,%.9f", e, result.loss_curve[e]);
            curve << buf << '\n';
        }
    }
    std::cout << "trained " << model->preset().name() << " (" << model->param_count()
              << " params), final train MAE " << result.loss_curve.back() << " kW\n";
    return 0;
}

int cmd_forecast(const json& config, std::uint64_t seed, const std::string& out,
                 const std::string& checkpoint_path) {
    RunPaths paths = prepare_out(out, config, "forecast", seed);
    LoadedData data = load_data(config, seed, /*need_tariff=*/false);
    CommunityProfile community = pick_community(data, config, seed);
    DataSplit split = split_from_config(config, community.aggregate.grid());
    auto [train_set, test_set] = build_dataset(split, community, data.weather, data.calendar);

    const json model_cfg = config.value("model", json::object());
    std::string family_text = get_or<std::string>(model_cfg, "family", "persistence");
    ModelFamily family = family_from_name(family_text);

    std::unique_ptr<Forecaster> forecaster;
    std::unique_ptr<DeepModel> model;
    if (family == ModelFamily::persistence) {
        forecaster = std::make_unique<PersistenceForecaster>();
    } else if (family == ModelFamily::knn) {
        auto knn = std::make_unique<KnnForecaster>(get_or<std::size_t>(model_cfg, "knn_k", 40));
        knn->fit(train_set);
        forecaster = std::move(knn);
    } else {
        if (checkpoint_path.empty()) throw UsageError("forecast with a deep family needs --checkpoint");
        model = load_checkpoint(checkpoint_path);
        forecaster = std::make_unique<DeepForecaster>(std::move(model));
    }

    std::ofstream csv(paths.file("forecast.csv"));
    csv << "day,hour,forecast_kW,actual_kW\n";
    char buf[96];
    for (std::size_t w = 0; w < test_set.windows.size(); ++w) {
        ForecastDay day;
        day.day = test_set.windows[w].day;
        day.history = &community.aggregate;
        day.dataset = &test_set;
        day.window_index = w;
        auto predicted = forecaster->forecast(day);
        for (std::size_t k = 0; k < kHoursPerDay; ++k) {
            std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f", format_date(day.day).c_str(), k,
                          predicted[k], test_set.windows[w].y[k]);
            csv << buf << '\n';
        }
    }
    std::cout << "wrote forecasts for " << test_set.windows.size() << " days\n";
    return 0;
}

int cmd_evaluate(const std::string& forecast_path, const std::string& actual_path) {
    auto read_series = [](const std::string& path, bool prefer_actual) {
        std::ifstream in(path);
        if (!in.is_open()) throw DataError("cannot open file: " + path);
        std::string line;
        std::vector<double> values;
        std::size_t value_col = 1, line_no = 0;
        std::size_t n_cols = 2;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto fields = split_csv_line(line);
            if (line_no == 1) {
                bool header = false;
                for (std::size_t c = 0; c < fields.size(); ++c) {
                    if (fields[c] == "forecast_kW" && !prefer_actual) {
                        value_col = c;
                        header = true;
                    }
                    if (fields[c] == "actual_kW" && prefer_actual) {
                        value_col = c;
                        header = true;
                    }
                }
                if (!header && (fields[0] == "timestamp" || fields[0] == "day")) header = true;
                n_cols = fields.size();
                if (header) continue;
            }
            if (fields.size() != n_cols || fields.size() <= value_col) {
                throw DataError(path + ":" + std::to_string(line_no) + ": ragged row");
            }
            values.push_back(parse_number(fields[value_col],
                                          path + ":" + std::to_string(line_no)));
        }
        if (values.empty()) throw DataError(path + ": no values");
        return values;
    };

    std::vector<double> forecast, actual;
    if (actual_path.empty()) {
        // single forecast-output file carrying both columns
        forecast = read_series(forecast_path, false);
        actual = read_series(forecast_path, true);
    } else {
        forecast = read_series(forecast_path, false);
        actual = read_series(actual_path, false);
    }
    if (forecast.size() != actual.size()) {
        throw DataError("forecast and actual series differ in length");
    }
    std::printf("nMAE %.2f%%\n", nmae(forecast, actual));
    return 0;
}

GridConfig grid_from_config(const json& config, std::uint64_t seed, std::size_t threads) {
    const json grid_cfg = config.value("grid", json::object());
    GridConfig gc;
    gc.baseline_community = get_or<std::size_t>(grid_cfg, "baseline_community", 50);
    gc.baseline_train_months = get_or<int>(grid_cfg, "baseline_train_months", 12);
    gc.baseline_size =
        size_class_from_name(get_or<std::string>(grid_cfg, "baseline_size", "5k"));
    gc.baseline_quarter =
        quarter_from_string(get_or<std::string>(grid_cfg, "baseline_quarter", "Q4"));
    gc.baseline_transfer = get_or<bool>(grid_cfg, "baseline_transfer", false);
    gc.test_year = get_or<int>(grid_cfg, "test_year", 2013);
    if (grid_cfg.contains("community_axis")) {
        gc.community_axis = grid_cfg.at("community_axis").get<std::vector<std::size_t>>();
    }
    if (grid_cfg.contains("train_axis")) {
        gc.train_axis = grid_cfg.at("train_axis").get<std::vector<int>>();
    }
    if (grid_cfg.contains("size_axis")) {
        gc.size_axis.clear();
        for (const auto& name : grid_cfg.at("size_axis").get<std::vector<std::string>>()) {
            gc.size_axis.push_back(size_class_from_name(name));
        }
    }
    if (grid_cfg.contains("transfer_axis")) {
        gc.transfer_axis = grid_cfg.at("transfer_axis").get<std::vector<bool>>();
    }
    if (grid_cfg.contains("quarter_axis")) {
        gc.quarter_axis.clear();
        for (const auto& name : grid_cfg.at("quarter_axis").get<std::vector<std::string>>()) {
            gc.quarter_axis.push_back(quarter_from_string(name));
        }
    }
    gc.repetitions = get_or<std::size_t>(grid_cfg, "repetitions", 20);
    if (grid_cfg.contains("families")) {
        gc.families.clear();
        for (const auto& name : grid_cfg.at("families").get<std::vector<std::string>>()) {
            gc.families.push_back(family_from_name(name));
        }
    }
    gc.train_config = train_from_config(config, seed);
    gc.threads = threads;
    return gc;
}

int cmd_grid(const json& config, std::uint64_t seed, const std::string& out,
             std::size_t threads) {
    RunPaths paths = prepare_out(out, config, "grid", seed);
    LoadedData data = load_data(config, seed, /*need_tariff=*/false);
    GridConfig gc = grid_from_config(config, seed, threads);
    GridSources sources{&data.pool, &data.weather, &data.calendar, &g_interrupted};
    std::vector<ResultRecord> records = run_grid(gc, sources, seed);
    emit_report(records, paths.out.string());
    if (g_interrupted.load()) {
        std::cerr << "interrupted: flushed " << records.size() << " records\n";
        return 3;
    }
    std::cout << "wrote " << records.size() << " records to " << paths.out.string() << '\n';
    return 0;
}

int cmd_dispatch(const json& config, std::uint64_t seed, const std::string& out,
                 double capacity_override) {
    RunPaths paths = prepare_out(out, config, "dispatch", seed);
    LoadedData data = load_data(config, seed, /*need_tariff=*/true);
    CommunityProfile community = pick_community(data, config, seed);
    DataSplit split = split_from_config(config, community.aggregate.grid());
    auto [train_set, test_set] = build_dataset(split, community, data.weather, data.calendar);

    BatteryParams battery = capacity_override >= 0.0
                                ? build_battery(BatteryScheme::fixed_capacity, capacity_override)
                                : battery_from_config(config, community.size);

    std::vector<std::string> forecaster_names = {"perfect", "persistence", "knn"};
    const json dispatch_cfg = config.value("dispatch", json::object());
    if (dispatch_cfg.contains("forecasters")) {
        forecaster_names = dispatch_cfg.at("forecasters").get<std::vector<std::string>>();
    }

    MpcInputs inputs;
    inputs.community = &community;
    inputs.weather = &data.weather;
    inputs.calendar = &data.calendar;
    inputs.tariff = &data.tariff;
    inputs.split = split;

    std::ofstream table(paths.file("case_study.csv"));
    table << "model,nmae_pct,unoptimized_eur,optimized_eur,savings_eur,savings_pct\n";
    char buf[160];

    const json model_cfg = config.value("model", json::object());
    for (const std::string& name : forecaster_names) {
        std::unique_ptr<Forecaster> forecaster;
        std::unique_ptr<DeepModel> model;
        inputs.perfect_oracle = false;
        if (name == "perfect") {
            forecaster = std::make_unique<PerfectForecaster>();
            inputs.perfect_oracle = true;
        } else if (name == "persistence") {
            forecaster = std::make_unique<PersistenceForecaster>();
        } else if (name == "knn") {
            auto knn = std::make_unique<KnnForecaster>(get_or<std::size_t>(model_cfg, "knn_k", 40));
            knn->fit(train_set);
            forecaster = std::move(knn);
        } else {
            ModelFamily family = family_from_name(name);
            SizeClass size =
                size_class_from_name(get_or<std::string>(model_cfg, "size_class", "5k"));
            auto deep = make_deep_model(preset_for(family, size), seed);
            TrainConfig tc = train_from_config(config, seed);
            train(*deep, train_set, tc);
            forecaster = std::make_unique<DeepForecaster>(std::move(deep));
        }

        CostReport report = simulate_mpc(*forecaster, inputs, battery);
        double nmae_for_table = name == "perfect" ? 0.0 : report.mean_daily_nmae_pct;
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%.6f,%.6f,%.6f,%.4f", name.c_str(),
                      nmae_for_table, report.total_unoptimized_eur, report.total_optimized_eur,
                      report.savings_eur, report.savings_pct);
        table << buf << '\n';
        write_cost_report_json(paths.file("report_" + name + ".json").string(), report);
        write_schedule_csv(paths.file("schedule_" + name + ".csv").string(), report, data.tariff);
        std::printf("%-12s savings %.2f%%\n", name.c_str(), report.savings_pct);
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    if (inputs.empty()) throw UsageError("report needs at least one --in results.csv");
    std::vector<ResultRecord> records;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in.is_open()) throw DataError("cannot open " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line_no == 1 || line.empty()) continue;
            auto fields = split_csv_line(line);
            if (fields.size() < 11) throw DataError(path + ": unexpected results schema");
            ResultRecord r;
            r.community_size = static_cast<std::size_t>(std::stoull(fields[0]));
            r.train_months = std::stoi(fields[1]);
            r.size_class = size_class_from_name(fields[2]);
            r.transfer_learning = fields[3] == "1";
            r.quarter = quarter_from_string(fields[4]);
            r.test_year = std::stoi(fields[5]);
            r.family = family_from_name(fields[6]);
            r.repetition = static_cast<std::size_t>(std::stoull(fields[7]));
            r.seed = std::stoull(fields[8]);
            if (!fields[9].empty()) r.nmae_pct = std::stod(fields[9]);
            r.error = fields[10];
            records.push_back(std::move(r));
        }
    }
    emit_report(records, out);
    std::cout << "aggregated " << records.size() << " records into " << out << '\n';
    return 0;
}

int fail_with(const Error& e, const std::string& out) {
    const char* kind = e.kind() == ErrorKind::usage ? "usage"
                       : e.kind() == ErrorKind::data ? "data"
                                                     : "solve";
    std::cerr << "error: " << e.what() << '\n';
    json detail = {{"error", {{"kind", kind}, {"message", e.what()}}}};
    if (!out.empty() && fs::exists(out)) {
        std::ofstream f(fs::path(out) / "error.json");
        f << detail.dump(2) << '\n';
    } else {
        std::cerr << detail.dump() << '\n';
    }
    switch (e.kind()) {
        case ErrorKind::usage: return 1;
        case ErrorKind::data: return 2;
        case ErrorKind::solve: return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_sigint);

    CLI::App app{"loadcast: load forecasting and battery dispatch experiments"};
    app.require_subcommand(1);

    std::string config_path, out, checkpoint_path, forecast_path, actual_path;
    std::vector<std::string> report_inputs;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    double capacity_override = -1.0;

    app.add_option("--config", config_path, "JSON experiment configuration")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker pool size")->capture_default_str();

    CLI::App* ingest = app.add_subcommand("ingest", "validate and normalize raw CSV inputs");
    CLI::App* synth = app.add_subcommand("synth", "generate synthetic standard load profiles");
    CLI::App* train_cmd = app.add_subcommand("train", "fit one model and write a checkpoint");
    CLI::App* forecast = app.add_subcommand("forecast", "write day-ahead forecast CSVs");
    forecast->add_option("--checkpoint", checkpoint_path, "model checkpoint to load");
    CLI::App* evaluate = app.add_subcommand("evaluate", "compute nMAE of forecasts");
    evaluate->add_option("--forecast", forecast_path, "forecast CSV")->required();
    evaluate->add_option("--actual", actual_path, "actual CSV (optional for 4-column files)");
    CLI::App* grid = app.add_subcommand("grid", "run the sensitivity grid");
    CLI::App* dispatch = app.add_subcommand("dispatch", "run the battery dispatch case study");
    dispatch->add_option("--capacity", capacity_override, "battery capacity in kWh (scheme 2)");
    CLI::App* report = app.add_subcommand("report", "aggregate results files");
    report->add_option("--in", report_inputs, "results.csv files to merge");

    CLI11_PARSE(app, argc, argv);

    try {
        json config = load_config(config_path);
        if (out.empty()) out = config.value("out", "");
        if (seed == 0 && config.contains("seed")) seed = config.at("seed").get<std::uint64_t>();
        if (threads == 1 && config.contains("threads")) {
            threads = config.at("threads").get<std::size_t>();
        }

        if (ingest->parsed()) return cmd_ingest(config, seed, out);
        if (synth->parsed()) return cmd_synth(config, seed, out);
        if (train_cmd->parsed()) return cmd_train(config, seed, out);
        if (forecast->parsed()) return cmd_forecast(config, seed, out, checkpoint_path);
        if (evaluate->parsed()) return cmd_evaluate(forecast_path, actual_path);
        if (grid->parsed()) return cmd_grid(config, seed, out, threads);
        if (dispatch->parsed()) return cmd_dispatch(config, seed, out, capacity_override);
        if (report->parsed()) return cmd_report(report_inputs, out);
        throw UsageError("no subcommand given");
    } catch (const Error& e) {
        return fail_with(e, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
