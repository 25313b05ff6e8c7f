#include "harvest/simplex.hpp"

#include "harvest/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace harvest {

LPInstance::LPInstance(std::size_t rows, std::size_t cols)
    : matrix(rows * cols, 0.0), senses(rows, RowSense::Equal), rhs(rows, 0.0), objective(cols, 0.0),
      row_names(rows) {}

double LPInstance::row_activity(std::size_t r, const std::vector<double>& x) const {
    double acc = 0.0;
    const double* row = &matrix[r * cols()];
    for (std::size_t c = 0; c < cols(); ++c) acc += row[c] * x[c];
    return acc;
}

std::string_view to_string(LPStatus s) noexcept {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

// Standardized problem: maximize c^T x s.t. A x = b, x >= 0, b >= 0, with the
// basis matrix refactorized every iteration (m is small, so this is cheap and
// keeps round-off from accumulating).
struct Standard {
    std::size_t m = 0, n = 0;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

class RevisedSimplex {
public:
    RevisedSimplex(const Standard& s, std::vector<std::size_t> basis, const SimplexParams& p)
        : s_(s), p_(p), basis_(std::move(basis)), live_(s.m, true), b_(s.b) {}

    /// Shifts b so that every current basic value grows by a distinct small
    /// amount. This removes the degeneracy that makes Bland's rule crawl; the
    /// optimal basis is then re-evaluated against the original b.
    void perturb(double eps) {
        factorize();
        Eigen::VectorXd delta(static_cast<Eigen::Index>(rows_.size()));
        for (Eigen::Index k = 0; k < delta.size(); ++k) {
            delta(k) = eps * (1.0 + static_cast<double>(k) / static_cast<double>(delta.size()));
        }
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const std::size_t col = basis_[rows_[k]];
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                b_(static_cast<Eigen::Index>(rows_[r])) += s_.a(static_cast<Eigen::Index>(rows_[r]), static_cast<Eigen::Index>(col)) * delta(static_cast<Eigen::Index>(k));
            }
        }
    }
    void restore() { b_ = s_.b; }

    std::vector<std::size_t>& basis() { return basis_; }
    std::vector<bool>& live() { return live_; }

    std::vector<std::size_t> live_rows() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < s_.m; ++i) {
            if (live_[i]) out.push_back(i);
        }
        return out;
    }

    void factorize() {
        rows_ = live_rows();
        const auto k = static_cast<Eigen::Index>(rows_.size());
        Eigen::MatrixXd bm(k, k);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < k; ++c) bm(r, c) = s_.a(static_cast<Eigen::Index>(rows_[r]), static_cast<Eigen::Index>(basis_[rows_[c]]));
        }
        lu_.compute(bm);
        Eigen::VectorXd rhs(k);
        for (Eigen::Index r = 0; r < k; ++r) rhs(r) = b_(static_cast<Eigen::Index>(rows_[r]));
        xb_ = lu_.solve(rhs);
    }

    /// B^{-1} a_j over the live rows (indexed like rows_).
    Eigen::VectorXd column(std::size_t j) const {
        const auto k = static_cast<Eigen::Index>(rows_.size());
        Eigen::VectorXd col(k);
        for (Eigen::Index r = 0; r < k; ++r) col(r) = s_.a(static_cast<Eigen::Index>(rows_[r]), static_cast<Eigen::Index>(j));
        return lu_.solve(col);
    }

    /// Simplex multipliers for cost over the live rows.
    Eigen::VectorXd duals(const std::vector<double>& cost) const {
        const auto k = static_cast<Eigen::Index>(rows_.size());
        Eigen::VectorXd cb(k);
        for (Eigen::Index r = 0; r < k; ++r) cb(r) = cost[basis_[rows_[r]]];
        return lu_.transpose().solve(cb);
    }

    double reduced_cost(const std::vector<double>& cost, const Eigen::VectorXd& y, std::size_t j) const {
        double d = cost[j];
        for (Eigen::Index r = 0; r < y.size(); ++r) d -= y(r) * s_.a(static_cast<Eigen::Index>(rows_[r]), static_cast<Eigen::Index>(j));
        return d;
    }

    enum class Outcome { Optimal, Unbounded };

    Outcome run(const std::vector<double>& cost, const std::vector<bool>& allowed, std::size_t& iterations,
                std::size_t& unbounded_col) {
        std::vector<bool> in_basis(s_.n, false);
        std::size_t degenerate_run = 0;
        while (true) {
            factorize();
            std::fill(in_basis.begin(), in_basis.end(), false);
            for (std::size_t r : rows_) in_basis[basis_[r]] = true;
            const Eigen::VectorXd y = duals(cost);

            // Dantzig pricing while pivots make progress; Bland's smallest-index
            // rule after a run of degenerate pivots, which rules out cycling.
            // Rows are scaled to max |a| = 1, so round-off in d_j is of order
            // eps * (|c_j| + |y|_1).
            const double d_tol = p_.cost_tol * (1.0 + y.lpNorm<1>());
            const bool bland = degenerate_run >= p_.degenerate_switch;
            std::size_t enter = s_.n;
            double best_d = d_tol;
            for (std::size_t j = 0; j < s_.n; ++j) {
                if (!allowed[j] || in_basis[j]) continue;
                const double d = reduced_cost(cost, y, j);
                if (d > best_d) {
                    enter = j;
                    if (bland) break;
                    best_d = d;
                }
            }
            if (enter == s_.n) return Outcome::Optimal;

            const Eigen::VectorXd u = column(enter);
            const double u_tol = p_.pivot_tol * std::max(1.0, u.lpNorm<Eigen::Infinity>());
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index r = 0; r < u.size(); ++r) {
                if (u(r) <= u_tol) continue;
                // basic values at round-off level count as degenerate, which is what Bland's rule needs
                const double ratio = (xb_(r) > p_.feasibility_tol ? xb_(r) : 0.0) / u(r);
                if (leave < 0 || ratio < best - 1e-12 * std::max(1.0, best)) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + 1e-12 * std::max(1.0, best) && basis_[rows_[r]] < basis_[rows_[leave]]) {
                    leave = r;  // smallest basic index among ties
                }
            }
            if (leave < 0) {
                unbounded_col = enter;
                direction_ = u;
                return Outcome::Unbounded;
            }
            degenerate_run = best > 0.0 ? 0 : degenerate_run + 1;
            basis_[rows_[static_cast<std::size_t>(leave)]] = enter;
            if (++iterations > p_.max_iterations) {
                std::ostringstream msg;
                msg << "simplex iteration guard exceeded (" << p_.max_iterations << " pivots); basis dump:";
                for (std::size_t r : rows_) msg << ' ' << basis_[r];
                fail(ErrorKind::Solver, "oclp", msg.str());
            }
        }
    }

    /// Dual simplex from a dual-feasible basis: restores primal feasibility
    /// after the rhs perturbation is removed. Returns false if a row has no
    /// eligible entering column.
    bool dual_run(const std::vector<double>& cost, const std::vector<bool>& allowed, std::size_t& iterations) {
        std::vector<bool> in_basis(s_.n, false);
        const std::size_t guard = iterations + p_.max_iterations / 4;
        while (true) {
            factorize();
            Eigen::Index leave = -1;
            double worst = -p_.feasibility_tol * std::max(1.0, xb_.lpNorm<Eigen::Infinity>());
            for (Eigen::Index r = 0; r < xb_.size(); ++r) {
                if (xb_(r) < worst) {
                    worst = xb_(r);
                    leave = r;
                }
            }
            if (leave < 0) return true;
            std::fill(in_basis.begin(), in_basis.end(), false);
            for (std::size_t r : rows_) in_basis[basis_[r]] = true;
            const Eigen::VectorXd y = duals(cost);
            Eigen::VectorXd e = Eigen::VectorXd::Zero(xb_.size());
            e(leave) = 1.0;
            const Eigen::VectorXd rho = lu_.transpose().solve(e);
            const double a_tol = p_.pivot_tol * std::max(1.0, rho.lpNorm<Eigen::Infinity>());
            std::size_t enter = s_.n;
            double best = 0.0;
            for (std::size_t j = 0; j < s_.n; ++j) {
                if (!allowed[j] || in_basis[j]) continue;
                double alpha = 0.0;
                for (Eigen::Index r = 0; r < rho.size(); ++r) alpha += rho(r) * s_.a(static_cast<Eigen::Index>(rows_[r]), static_cast<Eigen::Index>(j));
                if (alpha >= -a_tol) continue;
                const double ratio = std::min(reduced_cost(cost, y, j), 0.0) / alpha;
                if (enter == s_.n || ratio < best) {
                    best = ratio;
                    enter = j;
                }
            }
            if (enter == s_.n) return false;
            basis_[rows_[static_cast<std::size_t>(leave)]] = enter;
            if (++iterations > guard) return false;
        }
    }

    double basic_value(std::size_t pos) const { return xb_(static_cast<Eigen::Index>(pos)); }
    const std::vector<std::size_t>& rows() const { return rows_; }
    const Eigen::VectorXd& direction() const { return direction_; }

private:
    const Standard& s_;
    const SimplexParams& p_;
    std::vector<std::size_t> basis_;
    std::vector<bool> live_;
    std::vector<std::size_t> rows_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd b_;
    Eigen::VectorXd xb_;
    Eigen::VectorXd direction_;
};

}  // namespace

LPSolution solve_lp(const LPInstance& lp, const SimplexParams& p) {
    const std::size_t m = lp.rows(), n = lp.cols();
    if (lp.matrix.size() != m * n || lp.senses.size() != m) {
        fail(ErrorKind::Solver, "oclp", "LP instance has inconsistent dimensions");
    }
    for (double v : lp.matrix) {
        if (!std::isfinite(v)) fail(ErrorKind::Solver, "oclp", "LP matrix has non-finite coefficients");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(lp.rhs[i])) fail(ErrorKind::Solver, "oclp", "LP rhs has non-finite entries");
    }

    // Standardize: row scaling by max |a|, slack for <= rows, sign flip for b < 0,
    // artificial wherever no +1 slack can start the basis.
    std::vector<double> scale(m, 1.0), sign(m, 1.0);
    std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
    std::size_t n_total = n;
    for (std::size_t i = 0; i < m; ++i) {
        double mx = 0.0;
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, std::abs(lp.at(i, j)));
        scale[i] = mx > 0.0 ? mx : 1.0;
        if (lp.senses[i] == RowSense::LessEqual) slack_col[i] = n_total++;
        if (lp.rhs[i] < 0.0) sign[i] = -1.0;
    }
    const std::size_t first_art = n_total;
    for (std::size_t i = 0; i < m; ++i) {
        const bool slack_starts = slack_col[i] != SIZE_MAX && sign[i] > 0.0;
        if (!slack_starts) art_col[i] = n_total++;
    }

    Standard st;
    st.m = m;
    st.n = n_total;
    st.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_total));
    st.b.resize(static_cast<Eigen::Index>(m));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double f = sign[i] / scale[i];
        for (std::size_t j = 0; j < n; ++j) st.a(r, static_cast<Eigen::Index>(j)) = f * lp.at(i, j);
        if (slack_col[i] != SIZE_MAX) st.a(r, static_cast<Eigen::Index>(slack_col[i])) = f;
        st.b(r) = f * lp.rhs[i];
        if (art_col[i] != SIZE_MAX) {
            st.a(r, static_cast<Eigen::Index>(art_col[i])) = 1.0;
            basis[i] = art_col[i];
        } else {
            basis[i] = slack_col[i];
        }
    }

    // Column equilibration: x_j = x'_j / col_scale_j. Needed when coefficients
    // span many decades (e.g. psi on a long interval).
    std::vector<double> col_scale(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double mx = st.a.col(static_cast<Eigen::Index>(j)).lpNorm<Eigen::Infinity>();
        if (mx > 0.0) {
            col_scale[j] = mx;
            st.a.col(static_cast<Eigen::Index>(j)) /= mx;
        }
    }

    LPSolution sol;
    RevisedSimplex rs(st, basis, p);
    std::size_t unbounded_col = 0;

    auto original_duals = [&](const std::vector<double>& cost) {
        const Eigen::VectorXd y = rs.duals(cost);
        std::vector<double> out(m, 0.0);
        const auto& rows = rs.rows();
        for (std::size_t k = 0; k < rows.size(); ++k) {
            out[rows[k]] = y(static_cast<Eigen::Index>(k)) * sign[rows[k]] / scale[rows[k]];
        }
        return out;
    };

    // Phase one: maximize -sum(artificials).
    std::vector<double> cost1(n_total, 0.0);
    for (std::size_t j = first_art; j < n_total; ++j) cost1[j] = -1.0;
    std::vector<bool> allowed(n_total, true);
    rs.run(cost1, allowed, sol.iterations, unbounded_col);
    double infeas = 0.0;
    for (std::size_t k = 0; k < rs.rows().size(); ++k) {
        if (rs.basis()[rs.rows()[k]] >= first_art) infeas += std::max(0.0, rs.basic_value(k));
    }
    if (infeas > p.feasibility_tol * std::max(1.0, st.b.lpNorm<Eigen::Infinity>())) {
        sol.status = LPStatus::Infeasible;
        sol.certificate = original_duals(cost1);
        sol.x.assign(n, 0.0);
        return sol;
    }

    // Swap zero-level artificials out of the basis; rows where no structural
    // column can replace them are redundant and dropped.
    for (std::size_t i = 0; i < m; ++i) {
        if (rs.basis()[i] < first_art) continue;
        rs.factorize();
        const auto& rows = rs.rows();
        const auto pos = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), i) - rows.begin());
        std::vector<bool> in_basis(n_total, false);
        for (std::size_t r : rows) in_basis[rs.basis()[r]] = true;
        std::size_t best = first_art;
        double best_abs = 1e-9;
        for (std::size_t j = 0; j < first_art; ++j) {
            if (in_basis[j]) continue;
            const double v = std::abs(rs.column(j)(static_cast<Eigen::Index>(pos)));
            if (v > best_abs) {
                best_abs = v;
                best = j;
            }
        }
        if (best == first_art) {
            rs.live()[i] = false;
        } else {
            rs.basis()[i] = best;
        }
    }

    // Phase two.
    std::vector<double> cost2(n_total, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost2[j] = lp.objective[j] / col_scale[j];
    for (std::size_t j = first_art; j < n_total; ++j) allowed[j] = false;
    const std::vector<std::size_t> start_basis = rs.basis();
    rs.perturb(p.perturbation);
    auto outcome = rs.run(cost2, allowed, sol.iterations, unbounded_col);
    rs.restore();
    if (outcome == RevisedSimplex::Outcome::Optimal) {
        rs.factorize();
        bool feasible = true;
        for (std::size_t k = 0; k < rs.rows().size(); ++k) feasible = feasible && rs.basic_value(k) >= -p.feasibility_tol;
        if (!feasible) {
            // the perturbed optimum stays dual feasible; repair it with dual pivots,
            // and only start over unperturbed if that fails
            if (rs.dual_run(cost2, allowed, sol.iterations)) {
                outcome = rs.run(cost2, allowed, sol.iterations, unbounded_col);
            } else {
                rs.basis() = start_basis;
                outcome = rs.run(cost2, allowed, sol.iterations, unbounded_col);
            }
        }
    }

    if (outcome == RevisedSimplex::Outcome::Unbounded) {
        sol.status = LPStatus::Unbounded;
        sol.certificate.assign(n, 0.0);
        if (unbounded_col < n) sol.certificate[unbounded_col] = 1.0 / col_scale[unbounded_col];
        const auto& rows = rs.rows();
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::size_t col = rs.basis()[rows[k]];
            if (col < n) sol.certificate[col] = -rs.direction()(static_cast<Eigen::Index>(k)) / col_scale[col];
        }
        sol.x.assign(n, 0.0);
        return sol;
    }

    rs.factorize();
    sol.status = LPStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t k = 0; k < rs.rows().size(); ++k) {
        const std::size_t col = rs.basis()[rs.rows()[k]];
        if (col < n) sol.x[col] = std::max(0.0, rs.basic_value(k)) / col_scale[col];
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];

    const std::vector<double> y = original_duals(cost2);
    sol.rows.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        RowReport& rep = sol.rows[i];
        rep.activity = lp.row_activity(i, sol.x);
        rep.rhs = lp.rhs[i];
        rep.dual = y[i];
        const double gap = rep.activity - rep.rhs;
        const double viol = lp.senses[i] == RowSense::Equal ? std::abs(gap) : std::max(gap, 0.0);
        sol.max_row_violation = std::max(sol.max_row_violation, viol);
        double mag = 1.0 + std::abs(rep.rhs);
        for (std::size_t j = 0; j < n; ++j) mag += std::abs(lp.at(i, j) * sol.x[j]);
        sol.max_row_violation_rel = std::max(sol.max_row_violation_rel, viol / mag);
        rep.active = lp.senses[i] == RowSense::Equal || std::abs(gap) <= 1e-9 * (1.0 + std::abs(rep.rhs));
    }
    return sol;
}

}  // namespace harvest
