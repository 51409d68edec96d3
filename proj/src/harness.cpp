#include "loadcast/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "loadcast/community.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/knn.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/rng.hpp"
#include "loadcast/synthgen.hpp"

namespace loadcast {

WeatherSeries make_synthetic_weather(const CivilDate& start, const CivilDate& end,
                                     std::uint64_t seed) {
    std::int64_t first_day = days_from_civil(start);
    std::int64_t end_day = days_from_civil(end);
    if (end_day <= first_day) throw DataError("weather range is empty");

    WeatherSeries weather;
    weather.start = first_day * 24;
    const std::size_t hours = static_cast<std::size_t>((end_day - first_day) * 24);
    weather.rows.reserve(hours);

    Rng rng(seed);
    constexpr double two_pi = 6.283185307179586476925286766559;
    // slow AR(1) drifts keep consecutive days alike, which is what makes
    // yesterday's weather a usable predictor for today
    double temp_drift = 0.0, wind_drift = 0.0, pressure_drift = 0.0;
    for (std::size_t i = 0; i < hours; ++i) {
        HourStamp h = weather.start + static_cast<HourStamp>(i);
        CivilDate date = date_of(h);
        double doy = static_cast<double>(day_of_year(date));
        double hod = static_cast<double>(hour_of_day(h));
        double seasonal = -std::cos(two_pi * (doy - 15.0) / static_cast<double>(days_in_year(date.year)));
        double daily = -std::cos(two_pi * (hod - 3.0) / 24.0);
        temp_drift = 0.995 * temp_drift + 0.35 * rng.normal();
        wind_drift = 0.98 * wind_drift + 0.6 * rng.normal();
        pressure_drift = 0.998 * pressure_drift + 0.25 * rng.normal();

        std::array<double, kWeatherColumns> row{};
        row[0] = 10.0 + 8.5 * seasonal + 3.0 * daily + temp_drift;       // temperature
        row[1] = row[0] - 2.5 + 0.4 * std::sin(two_pi * hod / 24.0);     // dew point
        row[2] = std::fmod(200.0 + 40.0 * wind_drift + 360.0, 360.0);    // wind direction
        row[3] = std::max(0.0, 14.0 + 5.0 * wind_drift);                 // wind speed
        row[4] = 1013.0 + 6.0 * pressure_drift;                          // pressure
        row[5] = std::clamp(78.0 - 1.2 * (row[0] - 10.0) + 2.0 * wind_drift, 5.0, 100.0);
        weather.rows.push_back(row);
    }
    return weather;
}

std::vector<LoadSeries> make_synthetic_pool(const SyntheticPoolSpec& spec,
                                            const WeatherSeries& weather,
                                            const HolidayCalendar& calendar) {
    if (spec.households == 0) throw DataError("pool needs at least one household");
    std::vector<LoadSeries> pool;
    pool.reserve(spec.households);
    for (std::size_t i = 0; i < spec.households; ++i) {
        Rng rng = Rng::derived(spec.seed, i);
        SyntheticSpec base;
        base.profile_type = ProfileType::household;
        base.start_date = spec.start;
        base.end_date = spec.end;
        base.annual_energy_kwh = rng.uniform(spec.annual_kwh_min, spec.annual_kwh_max);
        base.calendar = calendar;
        LoadSeries series = generate_profile(base);
        char id[32];
        std::snprintf(id, sizeof(id), "synth%04zu", i);
        series.id = id;
        for (std::size_t k = 0; k < series.values_kw.size(); ++k) {
            double v = series.values_kw[k];
            if (spec.weather_coupling_kw_per_degc > 0.0) {
                const auto& wx = weather.at(series.start + static_cast<HourStamp>(k));
                v += spec.weather_coupling_kw_per_degc * std::max(0.0, spec.t_ref_c - wx[0]);
            }
            if (spec.noise_sd > 0.0) v *= std::max(0.0, 1.0 + spec.noise_sd * rng.normal());
            series.values_kw[k] = v;
        }
        pool.push_back(std::move(series));
    }
    return pool;
}

namespace {

struct Cell {
    std::size_t community_size;
    int train_months;
    SizeClass size_class;
    bool transfer_learning;
    Quarter quarter;

    auto key() const {
        return std::tie(community_size, train_months, size_class, transfer_learning, quarter);
    }
    bool operator<(const Cell& o) const { return key() < o.key(); }
};

std::vector<Cell> enumerate_cells(const GridConfig& c) {
    Cell baseline{c.baseline_community, c.baseline_train_months, c.baseline_size,
                  c.baseline_transfer, c.baseline_quarter};
    std::set<Cell> cells;
    cells.insert(baseline);
    for (std::size_t v : c.community_axis) {
        Cell cell = baseline;
        cell.community_size = v;
        cells.insert(cell);
    }
    for (int v : c.train_axis) {
        Cell cell = baseline;
        cell.train_months = v;
        cells.insert(cell);
    }
    for (SizeClass v : c.size_axis) {
        Cell cell = baseline;
        cell.size_class = v;
        cells.insert(cell);
    }
    for (bool v : c.transfer_axis) {
        Cell cell = baseline;
        cell.transfer_learning = v;
        cells.insert(cell);
    }
    for (Quarter v : c.quarter_axis) {
        Cell cell = baseline;
        cell.quarter = v;
        cells.insert(cell);
    }
    return {cells.begin(), cells.end()};
}

// Stable across runs and platforms; used to derive per-task seeds.
std::uint64_t fnv_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string cell_tag(const Cell& cell, std::size_t rep, ModelFamily family) {
    return std::to_string(cell.community_size) + "|" + std::to_string(cell.train_months) + "|" +
           size_class_name(cell.size_class) + "|" + (cell.transfer_learning ? "tl" : "plain") +
           "|q" + std::to_string(static_cast<int>(cell.quarter)) + "|" + std::to_string(rep) +
           "|" + family_name(family);
}

struct CellData {
    DataSplit split;
    Dataset train;
    Dataset test;
    const CommunityProfile* community;
};

ResultRecord evaluate_family(const Cell& cell, std::size_t rep, ModelFamily family,
                             const CellData& data, const GridConfig& config,
                             const GridSources& sources, std::uint64_t master_seed) {
    ResultRecord record;
    record.community_size = cell.community_size;
    record.train_months = cell.train_months;
    record.size_class = cell.size_class;
    record.transfer_learning = cell.transfer_learning;
    record.quarter = cell.quarter;
    record.test_year = config.test_year;
    record.family = family;
    record.repetition = rep;
    record.seed = Rng::derived(master_seed, fnv_hash(cell_tag(cell, rep, family))).next_u64();

    auto started = std::chrono::steady_clock::now();

    std::unique_ptr<Forecaster> forecaster;
    if (family == ModelFamily::persistence) {
        forecaster = std::make_unique<PersistenceForecaster>();
    } else if (family == ModelFamily::knn) {
        auto knn = std::make_unique<KnnForecaster>();
        knn->fit(data.train);
        forecaster = std::move(knn);
    } else {
        ModelPreset preset = preset_for(family, cell.size_class);
        auto model = make_deep_model(preset, record.seed);
        TrainConfig train_config = config.train_config;
        train_config.seed = record.seed;
        if (cell.transfer_learning) {
            // Pretraining source: a synthetic profile over the pool's full
            // coverage, scaled so its mean power matches the training target.
            const LoadSeries& target = data.community->aggregate;
            double train_mean = 0.0;
            std::size_t train_hours = data.split.train.hours();
            for (std::size_t i = 0; i < train_hours; ++i) {
                train_mean += target.at(data.split.train.start + static_cast<HourStamp>(i));
            }
            train_mean /= static_cast<double>(train_hours);

            SyntheticSpec synth_spec;
            synth_spec.profile_type = ProfileType::household;
            HourlyGrid coverage = target.grid();
            HourlyGrid weather_coverage = sources.weather->grid();
            HourStamp synth_start = std::max(coverage.start, weather_coverage.start);
            HourStamp synth_end = std::min(coverage.end(), weather_coverage.end());
            synth_spec.start_date = date_of(synth_start + 23);  // round up to whole days
            synth_spec.end_date = date_of(synth_end);
            synth_spec.annual_energy_kwh = std::max(1.0, train_mean * 8760.0);
            synth_spec.calendar = *sources.calendar;
            LoadSeries synth = generate_profile(synth_spec);

            HourRange synth_range{hour_stamp(synth_spec.start_date, 0),
                                  hour_stamp(synth_spec.end_date, 0)};
            Dataset synth_set =
                build_range_dataset(synth, *sources.weather, *sources.calendar, synth_range, 21);
            pretrain_finetune(*model, synth_set, data.train, train_config);
        } else {
            train(*model, data.train, train_config);
        }
        forecaster = std::make_unique<DeepForecaster>(std::move(model));
    }

    // evaluate day by day on the test windows
    std::vector<double> all_forecast, all_actual;
    for (std::size_t w = 0; w < data.test.windows.size(); ++w) {
        ForecastDay day;
        day.day = data.test.windows[w].day;
        day.history = &data.community->aggregate;
        day.dataset = &data.test;
        day.window_index = w;
        auto predicted = forecaster->forecast(day);
        std::vector<double> f(predicted.begin(), predicted.end());
        std::vector<double> a(data.test.windows[w].y.begin(), data.test.windows[w].y.end());
        record.per_day_nmae_pct.push_back(nmae(f, a));
        all_forecast.insert(all_forecast.end(), f.begin(), f.end());
        all_actual.insert(all_actual.end(), a.begin(), a.end());
    }
    record.nmae_pct = nmae(all_forecast, all_actual);
    record.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

}  // namespace

std::vector<ResultRecord> run_grid(const GridConfig& config, const GridSources& sources,
                                   std::uint64_t master_seed) {
    if (sources.pool == nullptr || sources.weather == nullptr || sources.calendar == nullptr) {
        throw UsageError("run_grid: missing data sources");
    }
    std::vector<Cell> cells = enumerate_cells(config);

    // Communities per size are sampled once and shared by every cell, so the
    // same repetition index means the same households everywhere.
    std::map<std::size_t, std::vector<CommunityProfile>> communities;
    for (const Cell& cell : cells) {
        if (communities.count(cell.community_size) == 0) {
            communities[cell.community_size] = sample_communities(
                *sources.pool, cell.community_size, config.repetitions,
                Rng::derived(master_seed, fnv_hash("communities|" +
                                                   std::to_string(cell.community_size)))
                    .next_u64());
        }
    }

    struct Task {
        const Cell* cell;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (const Cell& cell : cells) {
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) tasks.push_back({&cell, rep});
    }

    std::vector<std::vector<ResultRecord>> task_records(tasks.size());
    std::atomic<std::size_t> next_task{0};

    auto worker = [&] {
        for (;;) {
            if (sources.cancel != nullptr && sources.cancel->load()) return;
            std::size_t i = next_task.fetch_add(1);
            if (i >= tasks.size()) return;
            const Cell& cell = *tasks[i].cell;
            std::size_t rep = tasks[i].rep;
            const CommunityProfile& community = communities[cell.community_size][rep];

            CellData data;
            data.community = &community;
            std::string cell_error;
            try {
                data.split = make_split(community.aggregate.grid(), cell.quarter, config.test_year,
                                        cell.train_months);
                auto built = build_dataset(data.split, community, *sources.weather,
                                           *sources.calendar);
                data.train = std::move(built.first);
                data.test = std::move(built.second);
            } catch (const std::exception& e) {
                cell_error = e.what();
            }

            for (ModelFamily family : config.families) {
                if (family != ModelFamily::persistence && family != ModelFamily::knn &&
                    !has_preset(family, cell.size_class)) {
                    continue;  // e.g. xlstm below 0.5k
                }
                ResultRecord record;
                if (!cell_error.empty()) {
                    record.community_size = cell.community_size;
                    record.train_months = cell.train_months;
                    record.size_class = cell.size_class;
                    record.transfer_learning = cell.transfer_learning;
                    record.quarter = cell.quarter;
                    record.test_year = config.test_year;
                    record.family = family;
                    record.repetition = rep;
                    record.error = cell_error;
                } else {
                    try {
                        record = evaluate_family(cell, rep, family, data, config, sources,
                                                 master_seed);
                    } catch (const std::exception& e) {
                        record.community_size = cell.community_size;
                        record.train_months = cell.train_months;
                        record.size_class = cell.size_class;
                        record.transfer_learning = cell.transfer_learning;
                        record.quarter = cell.quarter;
                        record.test_year = config.test_year;
                        record.family = family;
                        record.repetition = rep;
                        record.error = e.what();
                    }
                }
                task_records[i].push_back(std::move(record));
            }
        }
    };

    std::size_t n_threads = std::max<std::size_t>(1, config.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::vector<ResultRecord> records;
    for (auto& chunk : task_records) {
        for (auto& r : chunk) records.push_back(std::move(r));
    }
    // canonical order makes reruns byte-identical regardless of scheduling
    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        auto key = [](const ResultRecord& r) {
            return std::tuple(r.community_size, r.train_months, r.size_class, r.transfer_learning,
                              r.quarter, r.repetition, family_name(r.family));
        };
        return key(a) < key(b);
    });
    return records;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create file: " + path);
    return out;
}

std::string record_key_csv(const ResultRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%s,%d,Q%d,%d,%s,%zu", r.community_size,
                  r.train_months, size_class_name(r.size_class).c_str(),
                  r.transfer_learning ? 1 : 0, static_cast<int>(r.quarter), r.test_year,
                  family_name(r.family).c_str(), r.repetition);
    return buf;
}

constexpr const char* kKeyHeader =
    "community_size,train_months,size_class,transfer_learning,quarter,test_year,family,repetition";

}  // namespace

void emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir) {
    if (records.empty()) throw DataError("emit_report: no records");
    std::filesystem::create_directories(out_dir);
    char buf[64];

    {
        auto out = open_out(out_dir + "/results.csv");
        out << kKeyHeader << ",seed,nmae_pct,error\n";
        for (const auto& r : records) {
            out << record_key_csv(r) << ',' << r.seed << ',';
            std::snprintf(buf, sizeof(buf), "%.6f", r.nmae_pct);
            out << (r.error.empty() ? buf : "") << ',' << r.error << '\n';
        }
    }
    {
        // wall-clock timings are inherently machine-dependent, kept apart so
        // results.csv stays byte-identical across reruns
        auto out = open_out(out_dir + "/timings.csv");
        out << kKeyHeader << ",train_seconds\n";
        for (const auto& r : records) {
            std::snprintf(buf, sizeof(buf), "%.3f", r.train_seconds);
            out << record_key_csv(r) << ',' << buf << '\n';
        }
    }
    {
        auto out = open_out(out_dir + "/per_day_nmae.csv");
        out << kKeyHeader << ",day_index,nmae_pct\n";
        for (const auto& r : records) {
            for (std::size_t d = 0; d < r.per_day_nmae_pct.size(); ++d) {
                std::snprintf(buf, sizeof(buf), "%.6f", r.per_day_nmae_pct[d]);
                out << record_key_csv(r) << ',' << d << ',' << buf << '\n';
            }
        }
    }
    {
        // mean and sample standard deviation over repetitions
        struct Stats {
            std::vector<double> values;
        };
        std::map<std::string, Stats> groups;
        for (const auto& r : records) {
            if (!r.error.empty()) continue;
            char key[160];
            std::snprintf(key, sizeof(key), "%zu,%d,%s,%d,Q%d,%d,%s", r.community_size,
                          r.train_months, size_class_name(r.size_class).c_str(),
                          r.transfer_learning ? 1 : 0, static_cast<int>(r.quarter), r.test_year,
                          family_name(r.family).c_str());
            groups[key].values.push_back(r.nmae_pct);
        }
        auto out = open_out(out_dir + "/summary.csv");
        out << "community_size,train_months,size_class,transfer_learning,quarter,test_year,family,"
               "repetitions,nmae_mean_pct,nmae_sd_pct\n";
        for (const auto& [key, stats] : groups) {
            double n = static_cast<double>(stats.values.size());
            double mean = 0.0;
            for (double v : stats.values) mean += v;
            mean /= n;
            double sd = 0.0;
            if (stats.values.size() > 1) {
                for (double v : stats.values) sd += (v - mean) * (v - mean);
                sd = std::sqrt(sd / (n - 1.0));
            }
            std::snprintf(buf, sizeof(buf), "%zu,%.4f,%.4f", stats.values.size(), mean, sd);
            out << key << ',' << buf << '\n';
        }
    }
    {
        auto out = open_out(out_dir + "/summary.json");
        std::size_t failed = 0;
        for (const auto& r : records) {
            if (!r.error.empty()) ++failed;
        }
        out << "{\n  \"records\": " << records.size() << ",\n  \"failed\": " << failed
            << ",\n  \"files\": [\"results.csv\", \"timings.csv\", \"per_day_nmae.csv\", "
               "\"summary.csv\"]\n}\n";
    }
}

}  // namespace loadcast
