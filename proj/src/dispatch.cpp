#include "loadcast/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "loadcast/errors.hpp"
#include "loadcast/simplex.hpp"

namespace loadcast {

void BatteryParams::validate() const {
    if (e_max_kwh < 0.0) throw DataError("battery: E_max must be non-negative");
    if (e_min_kwh < 0.0 || e_min_kwh > e_max_kwh) {
        throw DataError("battery: E_min must lie in [0, E_max]");
    }
    if (p_max_kw < 0.0) throw DataError("battery: P_max must be non-negative");
    if (e_max_kwh > 0.0 && p_max_kw == 0.0) throw DataError("battery: P_max must be positive");
    if (eta_ch <= 0.0 || eta_ch > 1.0 || eta_dis <= 0.0 || eta_dis > 1.0) {
        throw DataError("battery: efficiencies must lie in (0, 1]");
    }
    if (e_start_kwh < e_min_kwh || e_start_kwh > e_max_kwh || e_end_kwh < e_min_kwh ||
        e_end_kwh > e_max_kwh) {
        throw DataError("battery: start/end energy must lie in [E_min, E_max]");
    }
}

BatteryParams build_battery(BatteryScheme scheme, double h_or_capacity) {
    double capacity = 0.0;
    if (scheme == BatteryScheme::per_household) {
        if (h_or_capacity < 1.0) throw DataError("battery: community size must be at least 1");
        capacity = 12.0 * h_or_capacity;
    } else {
        // capacity 0 is the degenerate no-battery case used by baselines
        if (h_or_capacity < 0.0) throw DataError("battery: capacity must be non-negative");
        capacity = h_or_capacity;
    }
    BatteryParams battery;
    battery.e_max_kwh = capacity;
    battery.e_min_kwh = 0.0;
    battery.p_max_kw = capacity / 4.0;  // C-rate 0.25
    battery.eta_ch = 0.922;
    battery.eta_dis = 0.922;
    battery.e_start_kwh = 0.5 * capacity;
    battery.e_end_kwh = 0.5 * capacity;
    battery.validate();
    return battery;
}

MilpInstance build_daily_milp(const std::vector<double>& forecast_24,
                              const std::vector<double>& prices_24,
                              const BatteryParams& battery, bool grid_floor_enabled) {
    if (forecast_24.size() != 24 || prices_24.size() != 24) {
        throw SolveError("daily dispatch expects 24 forecast and 24 price values");
    }
    battery.validate();
    MilpInstance instance;
    instance.forecast_kw = forecast_24;
    for (double& f : instance.forecast_kw) {
        if (!std::isfinite(f)) throw SolveError("dispatch: forecast must be finite");
        f = std::max(f, 0.0);
    }
    instance.prices_eur_per_kwh = prices_24;
    instance.battery = battery;
    instance.grid_floor_enabled = grid_floor_enabled;
    return instance;
}

namespace {

// LP variable layout: [P_ch 0..N-1, P_dis N..2N-1, b 2N..3N-1].
// E and P_grid are eliminated through the balance equations.
LpProblem relaxation(const MilpInstance& inst, const std::vector<int>& fixed) {
    const std::size_t n = inst.periods();
    const BatteryParams& bat = inst.battery;
    const double dt = inst.dt_hours;
    const double floor_fraction = inst.grid_floor_enabled ? inst.grid_floor_fraction : 0.0;

    LpProblem lp;
    lp.num_vars = 3 * n;
    lp.objective.assign(3 * n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        lp.objective[p] = inst.prices_eur_per_kwh[p] * dt;
        lp.objective[n + p] = -inst.prices_eur_per_kwh[p] * dt;
    }

    auto zero_row = [&] { return std::vector<double>(3 * n, 0.0); };

    // grid floor: P_grid = P_ch - P_dis + f >= floor * f
    for (std::size_t p = 0; p < n; ++p) {
        auto row = zero_row();
        row[p] = -1.0;
        row[n + p] = 1.0;
        lp.add_le(std::move(row), (1.0 - floor_fraction) * inst.forecast_kw[p]);
    }

    // energy window at every interior time point (prefix sums of the balance)
    for (std::size_t t = 1; t < n; ++t) {
        auto upper = zero_row();
        auto lower = zero_row();
        for (std::size_t p = 0; p < t; ++p) {
            upper[p] = bat.eta_ch * dt;
            upper[n + p] = -dt / bat.eta_dis;
            lower[p] = -bat.eta_ch * dt;
            lower[n + p] = dt / bat.eta_dis;
        }
        lp.add_le(std::move(upper), bat.e_max_kwh - bat.e_start_kwh);
        lp.add_le(std::move(lower), bat.e_start_kwh - bat.e_min_kwh);
    }

    // end condition E_N = E_end
    {
        auto row = zero_row();
        for (std::size_t p = 0; p < n; ++p) {
            row[p] = bat.eta_ch * dt;
            row[n + p] = -dt / bat.eta_dis;
        }
        lp.add_eq(std::move(row), bat.e_end_kwh - bat.e_start_kwh);
    }

    // power limits tied to the binaries: P_ch <= b P_max, P_dis <= (1 - b) P_max
    for (std::size_t p = 0; p < n; ++p) {
        auto row = zero_row();
        row[p] = 1.0;
        row[2 * n + p] = -bat.p_max_kw;
        lp.add_le(std::move(row), 0.0);
    }
    for (std::size_t p = 0; p < n; ++p) {
        auto row = zero_row();
        row[n + p] = 1.0;
        row[2 * n + p] = bat.p_max_kw;
        lp.add_le(std::move(row), bat.p_max_kw);
    }

    // binaries: relaxed to [0, 1], or pinned by the branch decisions
    for (std::size_t p = 0; p < n; ++p) {
        if (fixed[p] < 0) {
            auto row = zero_row();
            row[2 * n + p] = 1.0;
            lp.add_le(std::move(row), 1.0);
        } else {
            auto row = zero_row();
            row[2 * n + p] = 1.0;
            lp.add_eq(std::move(row), static_cast<double>(fixed[p]));
        }
    }
    return lp;
}

double constant_cost(const MilpInstance& inst) {
    double c = 0.0;
    for (std::size_t p = 0; p < inst.periods(); ++p) {
        c += inst.forecast_kw[p] * inst.prices_eur_per_kwh[p] * inst.dt_hours;
    }
    return c;
}

struct Node {
    double bound;
    std::vector<int> fixed;
    std::vector<double> x;

    bool operator<(const Node& other) const { return bound > other.bound; }  // min-heap
};

constexpr double kIntegralityTol = 1e-7;

// A relaxation point is schedule-feasible when no period charges and
// discharges at once; the binaries then follow from the power signs.
std::size_t most_violated_period(const MilpInstance& inst, const std::vector<double>& x,
                                 double* worst_out) {
    const std::size_t n = inst.periods();
    double worst = 0.0;
    std::size_t at = n;
    for (std::size_t p = 0; p < n; ++p) {
        double overlap = std::min(x[p], x[n + p]);
        if (overlap > worst) {
            worst = overlap;
            at = p;
        }
    }
    if (worst_out != nullptr) *worst_out = worst;
    return at;
}

DispatchSchedule schedule_from_point(const MilpInstance& inst, const std::vector<double>& x) {
    const std::size_t n = inst.periods();
    DispatchSchedule s;
    s.p_ch_kw.resize(n);
    s.p_dis_kw.resize(n);
    s.p_grid_kw.resize(n);
    s.b_ch.resize(n);
    s.b_dis.resize(n);
    s.energy_kwh.assign(n + 1, inst.battery.e_start_kwh);
    double cost = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double ch = std::max(0.0, x[p]);
        double dis = std::max(0.0, x[n + p]);
        // net out the (tolerance-sized) overlap so exactly one side is active;
        // the grid power and objective are unchanged by this
        double overlap = std::min(ch, dis);
        ch -= overlap;
        dis -= overlap;
        s.p_ch_kw[p] = ch;
        s.p_dis_kw[p] = dis;
        s.b_ch[p] = (dis > 0.0) ? 0 : 1;
        s.b_dis[p] = 1 - s.b_ch[p];
        s.p_grid_kw[p] = ch - dis + inst.forecast_kw[p];
        s.energy_kwh[p + 1] = s.energy_kwh[p] +
                              (inst.battery.eta_ch * ch - dis / inst.battery.eta_dis) *
                                  inst.dt_hours;
        cost += s.p_grid_kw[p] * inst.prices_eur_per_kwh[p] * inst.dt_hours;
    }
    s.objective_eur = cost;
    return s;
}

}  // namespace

double lp_relaxation_value(const MilpInstance& instance) {
    std::vector<int> free_all(instance.periods(), -1);
    LpSolution lp = solve_lp(relaxation(instance, free_all));
    if (lp.status != LpStatus::optimal) {
        throw SolveError("dispatch relaxation is not solvable");
    }
    return lp.objective + constant_cost(instance);
}

DispatchSchedule solve_milp(const MilpInstance& instance, const SolveOptions& options) {
    const std::size_t n = instance.periods();
    if (n == 0) throw SolveError("dispatch: empty instance");
    instance.battery.validate();

    // Cheap reachability screen so infeasibility errors can name the cause.
    {
        const BatteryParams& b = instance.battery;
        double max_rise = b.eta_ch * b.p_max_kw * instance.dt_hours * static_cast<double>(n);
        double max_fall = b.p_max_kw / b.eta_dis * instance.dt_hours * static_cast<double>(n);
        if (b.e_end_kwh - b.e_start_kwh > max_rise + 1e-9 ||
            b.e_start_kwh - b.e_end_kwh > max_fall + 1e-9) {
            throw SolveError("dispatch infeasible: end-energy condition unreachable within " +
                             std::to_string(n) + " periods");
        }
        if (instance.grid_floor_enabled && instance.grid_floor_fraction > 1.0) {
            throw SolveError("dispatch infeasible: grid floor above 100% of the forecast");
        }
    }

    std::priority_queue<Node> open;
    {
        Node root;
        root.fixed.assign(n, -1);
        LpSolution lp = solve_lp(relaxation(instance, root.fixed));
        if (lp.status != LpStatus::optimal) {
            throw SolveError("dispatch infeasible: relaxation has no feasible point");
        }
        root.bound = lp.objective;
        root.x = std::move(lp.x);
        open.push(std::move(root));
    }

    const double base_cost = constant_cost(instance);
    bool have_incumbent = false;
    double incumbent_value = 0.0;
    std::vector<double> incumbent_x;
    std::size_t nodes_processed = 0;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (have_incumbent && node.bound >= incumbent_value - options.absolute_gap_eur) {
            break;  // best-first order: nothing left can improve beyond the gap
        }
        if (++nodes_processed > options.node_limit) {
            if (!have_incumbent) {
                throw SolveError("dispatch: node limit hit without an incumbent");
            }
            double gap = incumbent_value - node.bound;
            throw SolveError("dispatch: node limit " + std::to_string(options.node_limit) +
                             " exceeded; incumbent " + std::to_string(incumbent_value + base_cost) +
                             " EUR, remaining gap " + std::to_string(gap) + " EUR");
        }

        double worst = 0.0;
        std::size_t branch_at = most_violated_period(instance, node.x, &worst);
        if (branch_at == n || worst <= kIntegralityTol) {
            if (!have_incumbent || node.bound < incumbent_value) {
                have_incumbent = true;
                incumbent_value = node.bound;
                incumbent_x = node.x;
            }
            continue;
        }

        for (int value : {1, 0}) {
            Node child;
            child.fixed = node.fixed;
            child.fixed[branch_at] = value;
            LpSolution lp = solve_lp(relaxation(instance, child.fixed));
            if (lp.status != LpStatus::optimal) continue;
            if (have_incumbent && lp.objective >= incumbent_value - options.absolute_gap_eur) {
                continue;
            }
            child.bound = lp.objective;
            child.x = std::move(lp.x);
            open.push(std::move(child));
        }
    }

    if (!have_incumbent) {
        throw SolveError("dispatch infeasible: no schedule satisfies the battery constraints");
    }
    DispatchSchedule schedule = schedule_from_point(instance, incumbent_x);
    validate_schedule(schedule, instance);
    return schedule;
}

void validate_schedule(const DispatchSchedule& s, const MilpInstance& inst, double tol) {
    const std::size_t n = inst.periods();
    const BatteryParams& b = inst.battery;
    auto fail = [](const std::string& what) { throw SolveError("schedule invariant: " + what); };

    if (s.p_ch_kw.size() != n || s.p_dis_kw.size() != n || s.p_grid_kw.size() != n ||
        s.b_ch.size() != n || s.b_dis.size() != n || s.energy_kwh.size() != n + 1) {
        fail("vector lengths do not match the instance");
    }
    if (std::fabs(s.energy_kwh.front() - b.e_start_kwh) > tol) fail("E_0 != E_start");
    if (std::fabs(s.energy_kwh.back() - b.e_end_kwh) > tol) fail("E_N != E_end");
    double floor_fraction = inst.grid_floor_enabled ? inst.grid_floor_fraction : 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        if (s.b_ch[p] + s.b_dis[p] != 1) fail("b_ch + b_dis != 1");
        if (s.p_ch_kw[p] < -tol || s.p_ch_kw[p] > s.b_ch[p] * b.p_max_kw + tol) {
            fail("P_ch outside [0, b_ch P_max]");
        }
        if (s.p_dis_kw[p] < -tol || s.p_dis_kw[p] > s.b_dis[p] * b.p_max_kw + tol) {
            fail("P_dis outside [0, b_dis P_max]");
        }
        if (s.p_ch_kw[p] * s.p_dis_kw[p] > tol) fail("simultaneous charge and discharge");
        double balance = s.p_grid_kw[p] + s.p_dis_kw[p] - s.p_ch_kw[p] - inst.forecast_kw[p];
        if (std::fabs(balance) > tol) fail("power balance violated");
        if (s.p_grid_kw[p] < floor_fraction * inst.forecast_kw[p] - tol) {
            fail("grid floor violated");
        }
        double step = (b.eta_ch * s.p_ch_kw[p] - s.p_dis_kw[p] / b.eta_dis) * inst.dt_hours;
        if (std::fabs(s.energy_kwh[p + 1] - s.energy_kwh[p] - step) > tol) {
            fail("energy balance violated");
        }
    }
    for (double e : s.energy_kwh) {
        if (e < b.e_min_kwh - tol || e > b.e_max_kwh + tol) fail("energy outside [E_min, E_max]");
    }
}

double realized_cost(const DispatchSchedule& schedule, const std::vector<double>& actual_kw,
                     const std::vector<double>& prices, double dt_hours) {
    if (actual_kw.size() != schedule.p_ch_kw.size() || prices.size() != actual_kw.size()) {
        throw SolveError("realized_cost: length mismatch");
    }
    double cost = 0.0;
    for (std::size_t p = 0; p < actual_kw.size(); ++p) {
        double grid = schedule.p_ch_kw[p] - schedule.p_dis_kw[p] + actual_kw[p];
        cost += std::max(grid, 0.0) * prices[p] * dt_hours;
    }
    return cost;
}

}  // namespace loadcast
