#include "loadcast/simplex.hpp"

#include <cmath>
#include <limits>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

// Dense tableau in canonical form: basis columns are unit vectors and the
// objective row carries reduced costs. Column layout: structural vars,
// slack/surplus vars, artificial vars, rhs last.
struct Tableau {
    std::size_t m = 0;
    std::size_t cols = 0;  // without rhs
    std::vector<std::vector<double>> a;  // m rows x (cols + 1)
    std::vector<double> z;               // objective row, cols + 1 (rhs = -objective value)
    std::vector<std::size_t> basis;

    void pivot(std::size_t row, std::size_t col) {
        double p = a[row][col];
        for (double& v : a[row]) v /= p;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == row) continue;
            double factor = a[r][col];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) a[r][c] -= factor * a[row][c];
        }
        double zf = z[col];
        if (zf != 0.0) {
            for (std::size_t c = 0; c <= cols; ++c) z[c] -= zf * a[row][c];
        }
        basis[row] = col;
    }

    // Bland: entering = lowest-index column with negative reduced cost;
    // leaving = min ratio, ties broken by lowest basis variable index.
    bool iterate(double tol, std::size_t usable_cols) {
        for (std::size_t col = 0; col < usable_cols; ++col) {
            if (z[col] < -tol) {
                std::size_t best_row = m;
                double best_ratio = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < m; ++r) {
                    if (a[r][col] > tol) {
                        double ratio = a[r][cols] / a[r][col];
                        if (ratio < best_ratio - tol ||
                            (std::fabs(ratio - best_ratio) <= tol &&
                             (best_row == m || basis[r] < basis[best_row]))) {
                            best_ratio = ratio;
                            best_row = r;
                        }
                    }
                }
                if (best_row == m) return false;  // unbounded along this column
                pivot(best_row, col);
                return true;
            }
        }
        return false;  // optimal
    }
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, double tol) {
    const std::size_t n = problem.num_vars;
    const std::size_t m = problem.rows.size();
    if (problem.objective.size() != n) {
        throw SolveError("lp: objective has " + std::to_string(problem.objective.size()) +
                         " coefficients for " + std::to_string(n) + " variables");
    }

    // Count extra columns: one slack per inequality, one artificial per
    // equality row or per inequality whose normalized form needs one.
    std::size_t n_slack = 0, n_art = 0;
    for (const auto& row : problem.rows) {
        if (row.coeffs.size() != n) throw SolveError("lp: row width mismatch");
        bool negative = row.rhs < 0.0;
        if (!row.equality) ++n_slack;
        if (row.equality || negative) ++n_art;
    }

    Tableau t;
    t.m = m;
    t.cols = n + n_slack + n_art;
    t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
    t.z.assign(t.cols + 1, 0.0);
    t.basis.assign(m, 0);

    std::size_t slack_at = n;
    std::size_t art_at = n + n_slack;
    std::vector<bool> is_artificial(t.cols, false);

    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = problem.rows[r];
        double sign = row.rhs < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.a[r][j] = sign * row.coeffs[j];
        t.a[r][t.cols] = sign * row.rhs;
        if (!row.equality) {
            t.a[r][slack_at] = sign;  // slack (or surplus when the row was flipped)
            if (sign > 0.0) t.basis[r] = slack_at;
            ++slack_at;
        }
        if (row.equality || sign < 0.0) {
            t.a[r][art_at] = 1.0;
            t.basis[r] = art_at;
            is_artificial[art_at] = true;
            ++art_at;
        }
    }

    // Phase 1: minimize the artificial sum.
    if (n_art > 0) {
        for (std::size_t c = 0; c < t.cols; ++c) {
            if (is_artificial[c]) t.z[c] = 1.0;
        }
        // canonicalize: subtract artificial basis rows from the objective row
        for (std::size_t r = 0; r < m; ++r) {
            if (is_artificial[t.basis[r]]) {
                for (std::size_t c = 0; c <= t.cols; ++c) t.z[c] -= t.a[r][c];
            }
        }
        while (t.iterate(tol, t.cols)) {
        }
        double infeasibility = -t.z[t.cols];
        if (infeasibility > 1e-7) return {LpStatus::infeasible, 0.0, {}};

        // Drive any artificial still in the basis (at zero level) out of it.
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_artificial[t.basis[r]]) continue;
            std::size_t replacement = t.cols;
            for (std::size_t c = 0; c < n + n_slack; ++c) {
                if (std::fabs(t.a[r][c]) > tol) {
                    replacement = c;
                    break;
                }
            }
            if (replacement < t.cols) {
                t.pivot(r, replacement);
            }
            // A fully zero row is redundant; the artificial stays basic at 0.
        }
    }

    // Phase 2 over structural + slack columns only.
    std::size_t usable = n + n_slack;
    t.z.assign(t.cols + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) t.z[j] = problem.objective[j];
    for (std::size_t r = 0; r < m; ++r) {
        double cost = t.basis[r] < n ? problem.objective[t.basis[r]] : 0.0;
        if (cost != 0.0) {
            for (std::size_t c = 0; c <= t.cols; ++c) t.z[c] -= cost * t.a[r][c];
        }
    }
    for (;;) {
        bool moved = t.iterate(tol, usable);
        if (!moved) {
            bool improvable = false;
            for (std::size_t c = 0; c < usable; ++c) {
                if (t.z[c] < -tol) {
                    improvable = true;
                    break;
                }
            }
            if (improvable) return {LpStatus::unbounded, 0.0, {}};
            break;
        }
    }

    LpSolution solution;
    solution.status = LpStatus::optimal;
    solution.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        if (t.basis[r] < n) solution.x[t.basis[r]] = t.a[r][t.cols];
    }
    double objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) objective += problem.objective[j] * solution.x[j];
    solution.objective = objective;
    return solution;
}

}  // namespace loadcast
