#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "loadcast/presets.hpp"
#include "loadcast/series.hpp"
#include "loadcast/split.hpp"
#include "loadcast/train.hpp"

namespace loadcast {

// --- synthetic data sources (demo runs, tests, pretraining pools) ---

WeatherSeries make_synthetic_weather(const CivilDate& start, const CivilDate& end,
                                     std::uint64_t seed);

struct SyntheticPoolSpec {
    std::size_t households = 20;
    CivilDate start;  // inclusive
    CivilDate end;    // exclusive
    double annual_kwh_min = 2000.0;
    double annual_kwh_max = 6000.0;
    double noise_sd = 0.20;  // multiplicative hourly noise
    // adds coupling * max(0, t_ref - temperature) kW to every household
    double weather_coupling_kw_per_degc = 0.0;
    double t_ref_c = 16.0;
    std::uint64_t seed = 0;
};

std::vector<LoadSeries> make_synthetic_pool(const SyntheticPoolSpec& spec,
                                            const WeatherSeries& weather,
                                            const HolidayCalendar& calendar);

// --- sensitivity grid ---

struct GridConfig {
    std::size_t baseline_community = 50;
    int baseline_train_months = 12;
    SizeClass baseline_size = SizeClass::c5k;
    Quarter baseline_quarter = Quarter::q4;
    bool baseline_transfer = false;
    int test_year = 2013;

    std::vector<std::size_t> community_axis = {1, 2, 10, 50, 100};
    std::vector<int> train_axis = {2, 4, 6, 9, 12, 15};
    std::vector<SizeClass> size_axis = {SizeClass::c0_1k, SizeClass::c0_2k, SizeClass::c0_5k,
                                        SizeClass::c5k,   SizeClass::c20k,  SizeClass::c40k,
                                        SizeClass::c80k};
    std::vector<bool> transfer_axis = {false, true};
    std::vector<Quarter> quarter_axis = {Quarter::q1, Quarter::q2, Quarter::q3, Quarter::q4};

    std::size_t repetitions = 20;
    std::vector<ModelFamily> families = {ModelFamily::persistence, ModelFamily::knn,
                                         ModelFamily::lstm, ModelFamily::transformer,
                                         ModelFamily::xlstm};
    TrainConfig train_config;
    std::size_t threads = 1;
};

// One evaluated (setting, repetition, family) combination.
struct ResultRecord {
    std::size_t community_size = 0;
    int train_months = 0;
    SizeClass size_class = SizeClass::c5k;
    bool transfer_learning = false;
    Quarter quarter = Quarter::q4;
    int test_year = 0;
    ModelFamily family = ModelFamily::persistence;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double nmae_pct = 0.0;
    std::vector<double> per_day_nmae_pct;
    double train_seconds = 0.0;  // wall clock, reported separately from results
    std::string error;           // non-empty when this combination failed
};

struct GridSources {
    const std::vector<LoadSeries>* pool = nullptr;
    const WeatherSeries* weather = nullptr;
    const HolidayCalendar* calendar = nullptr;
    // when set, a true value stops scheduling new work; finished records are
    // still returned so partial results can be flushed
    const std::atomic<bool>* cancel = nullptr;
};

// Runs every unique grid cell (baseline plus one-axis variations) times
// repetitions times families. Deterministic in master_seed; per-cell failures
// are recorded and the grid continues.
std::vector<ResultRecord> run_grid(const GridConfig& config, const GridSources& sources,
                                   std::uint64_t master_seed);

// results.csv (deterministic), timings.csv (wall clock), per_day_nmae.csv,
// summary.csv (mean and sample sd over repetitions), summary.json.
void emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir);

}  // namespace loadcast
