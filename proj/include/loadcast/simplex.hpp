#pragma once

#include <cstddef>
#include <vector>

namespace loadcast {

// minimize c.x  s.t.  per row: a.x <= b or a.x = b, and x >= 0.
struct LpProblem {
    std::size_t num_vars = 0;
    std::vector<double> objective;

    struct Row {
        std::vector<double> coeffs;
        double rhs = 0.0;
        bool equality = false;
    };
    std::vector<Row> rows;

    void add_le(std::vector<double> coeffs, double rhs) {
        rows.push_back({std::move(coeffs), rhs, false});
    }
    void add_eq(std::vector<double> coeffs, double rhs) {
        rows.push_back({std::move(coeffs), rhs, true});
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

// Two-phase primal simplex on a dense tableau. Bland's rule keeps it free of
// cycling; pivot_tol is the zero threshold for reduced costs and pivots.
LpSolution solve_lp(const LpProblem& problem, double pivot_tol = 1e-9);

}  // namespace loadcast
