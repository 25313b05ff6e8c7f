#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace harvest {

enum class RowSense { Equal, LessEqual };

/// maximize c^T x subject to A x (=|<=) b, x >= 0, with A stored dense row-major.
class LPInstance {
public:
    LPInstance() = default;
    LPInstance(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rhs.size(); }
    std::size_t cols() const noexcept { return objective.size(); }

    double& at(std::size_t r, std::size_t c) { return matrix[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return matrix[r * cols() + c]; }

    /// Sum_c A[r][c] x[c].
    double row_activity(std::size_t r, const std::vector<double>& x) const;

    std::vector<double> matrix;
    std::vector<RowSense> senses;
    std::vector<double> rhs;
    std::vector<double> objective;
    std::vector<std::string> row_names;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LPStatus s) noexcept;

struct RowReport {
    double activity = 0.0;
    double rhs = 0.0;
    bool active = false;
    double dual = 0.0;
};

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<RowReport> rows;
    /// Unbounded: a ray d >= 0 with A d = 0 (on equality rows) and c^T d > 0.
    /// Infeasible: the phase-one multipliers y over the rows.
    std::vector<double> certificate;
    std::size_t iterations = 0;
    /// max_r |activity - rhs| (equality) or max(activity - rhs, 0) (<=).
    double max_row_violation = 0.0;
    /// Same, divided by 1 + |rhs| + sum_c |A[r][c] x[c]| of each row.
    double max_row_violation_rel = 0.0;
};

struct SimplexParams {
    std::size_t max_iterations = 200000;
    /// Relative to max |B^-1 a_j|.
    double pivot_tol = 1e-9;
    /// Relative to 1 + |y|_1 (rows are scaled to unit max norm).
    double cost_tol = 1e-10;
    double feasibility_tol = 1e-9;
    /// Phase-two shift of the basic values (rows scaled to unit max norm).
    double perturbation = 1e-7;
    /// Consecutive degenerate pivots after which pricing falls back to Bland's rule.
    std::size_t degenerate_switch = 50;
};

/// Two-phase dense primal simplex; Dantzig pricing with Bland's anti-cycling
/// rule on degenerate stretches. The basic
/// solution is re-solved from the original columns at the end and checked
/// against every row. Throws Solver when the iteration guard trips.
LPSolution solve_lp(const LPInstance& lp, const SimplexParams& params = {});

}  // namespace harvest
