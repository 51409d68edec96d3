#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace loadcast {

struct BatteryParams {
    double e_max_kwh = 0.0;
    double e_min_kwh = 0.0;
    double p_max_kw = 0.0;
    double eta_ch = 0.922;
    double eta_dis = 0.922;
    double e_start_kwh = 0.0;
    double e_end_kwh = 0.0;

    void validate() const;  // throws DataError on violated invariants
};

enum class BatteryScheme { per_household, fixed_capacity };

// Scheme 1: 12 kWh per household; scheme 2: explicit capacity. Both use a
// 4-hour battery (P_max = E_max / 4), symmetric efficiency 0.922 per leg
// (85% round trip), and half-full start/end state.
BatteryParams build_battery(BatteryScheme scheme, double h_or_capacity);

struct MilpInstance {
    std::vector<double> forecast_kw;
    std::vector<double> prices_eur_per_kwh;
    BatteryParams battery;
    bool grid_floor_enabled = true;
    double grid_floor_fraction = 0.15;
    double dt_hours = 1.0;

    std::size_t periods() const { return forecast_kw.size(); }
};

MilpInstance build_daily_milp(const std::vector<double>& forecast_24,
                              const std::vector<double>& prices_24,
                              const BatteryParams& battery, bool grid_floor_enabled);

struct DispatchSchedule {
    std::vector<double> p_ch_kw;
    std::vector<double> p_dis_kw;
    std::vector<double> p_grid_kw;   // planned, against the forecast
    std::vector<double> energy_kwh;  // length N + 1
    std::vector<int> b_ch;
    std::vector<int> b_dis;
    double objective_eur = 0.0;
};

struct SolveOptions {
    double absolute_gap_eur = 1e-6;
    std::size_t node_limit = 200000;
};

// Exact branch-and-bound over the per-period charge/discharge binaries with
// LP relaxation bounds; globally optimal within the absolute gap.
DispatchSchedule solve_milp(const MilpInstance& instance, const SolveOptions& options = {});

// LP relaxation value alone (lower bound on the optimum).
double lp_relaxation_value(const MilpInstance& instance);

// Optimal cost with every period's charge/discharge binary pinned, or no
// value when that pattern is infeasible. Exposed for the enumeration
// cross-checks of the solver.
std::optional<double> fixed_pattern_value(const MilpInstance& instance,
                                          const std::vector<int>& b_ch);

// Throws SolveError when the schedule violates any model invariant
// (complementarity, power bounds, energy dynamics, start/end state).
void validate_schedule(const DispatchSchedule& schedule, const MilpInstance& instance,
                       double tol = 1e-6);

// Settlement of a planned schedule against the realized load: the grid
// absorbs the forecast error and feed-in earns nothing.
double realized_cost(const DispatchSchedule& schedule, const std::vector<double>& actual_kw,
                     const std::vector<double>& prices, double dt_hours = 1.0);

}  // namespace loadcast
