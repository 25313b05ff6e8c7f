#include "harvest/oclp.hpp"

#include "harvest/error.hpp"
#include "harvest/value.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace harvest {

MeasureGrid::MeasureGrid(std::vector<double> states, std::vector<std::vector<double>> jumps, std::size_t x0_index,
                         bool tau_at_states)
    : states_(std::move(states)), jumps_(std::move(jumps)), x0_index_(x0_index) {
    if (states_.empty() || jumps_.size() != states_.size() || x0_index_ >= states_.size()) {
        fail(ErrorKind::Config, "oclp", "measure grid is inconsistent");
    }
    tau_support_.push_back(0.0);
    if (tau_at_states) tau_support_.insert(tau_support_.end(), states_.begin(), states_.end());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (!(states_[i] > 0.0) || (i > 0 && !(states_[i] > states_[i - 1]))) {
            fail(ErrorKind::Config, "oclp", "measure grid states must be positive and strictly increasing");
        }
        for (double z : jumps_[i]) {
            if (!(z >= 0.0 && z <= states_[i])) {
                fail(ErrorKind::Config, "oclp", "harvest atom outside R = {(x, z): 0 <= z <= x}");
            }
            harvest_.push_back({i, states_[i], z});
        }
    }
}

std::optional<std::size_t> MeasureGrid::find_state(double x) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), x * (1.0 - 1e-12));
    if (it != states_.end() && std::abs(*it - x) <= 1e-12 * std::max(1.0, std::abs(x))) {
        return static_cast<std::size_t>(it - states_.begin());
    }
    return std::nullopt;
}

MeasureGrid make_measure_grid(const ModelSpec& m, double x0, const std::vector<double>& extra_nodes,
                              double bstar_hint, const MeasureGridParams& params) {
    if (!(x0 > 0.0)) fail(ErrorKind::Domain, "oclp", "x0 must be > 0");
    if (params.n_states < 4 || params.jump_levels < 1) fail(ErrorKind::Config, "oclp", "measure grid too coarse");
    const double x_max = params.x_max > 0.0 ? params.x_max
                                            : std::max({4.0 * x0, 4.0 * bstar_hint, 10.0 * m.scale()});
    if (x0 > x_max) fail(ErrorKind::Domain, "oclp", "x0 beyond the truncated domain");

    std::vector<double> exact{x0};
    for (double e : extra_nodes) {
        if (e > 0.0 && e <= x_max) exact.push_back(e);
    }
    std::sort(exact.begin(), exact.end());
    exact.erase(std::unique(exact.begin(), exact.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
                exact.end());

    const double h = x_max / static_cast<double>(params.n_states);
    std::vector<double> states = exact;
    for (std::size_t i = 1; i <= params.n_states; ++i) {
        const double x = i == params.n_states ? x_max : h * static_cast<double>(i);
        const bool clash = std::any_of(exact.begin(), exact.end(), [&](double e) { return std::abs(e - x) < 1e-6 * h; });
        if (!clash) states.push_back(x);
    }
    std::sort(states.begin(), states.end());

    std::vector<std::vector<double>> jumps(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double x = states[i];
        auto& js = jumps[i];
        js.push_back(0.0);
        const int levels = params.jump_levels;
        const double z_min = params.z_min_rel * x;
        for (int k = 0; k < levels; ++k) {
            const double frac = levels == 1 ? 1.0 : static_cast<double>(k) / (levels - 1);
            js.push_back(k + 1 == levels ? x : z_min * std::pow(x / z_min, frac));
        }
    }
    const auto x0_index = static_cast<std::size_t>(
        std::find_if(states.begin(), states.end(), [&](double s) { return std::abs(s - x0) <= 1e-12 * std::max(1.0, x0); }) -
        states.begin());
    return MeasureGrid(std::move(states), std::move(jumps), x0_index, params.tau_at_states);
}

TestFunctionBasis::TestFunctionBasis(double x_max, std::size_t size) : size_(size) {
    if (size < 5) fail(ErrorKind::Config, "oclp", "test-function basis needs >= 5 elements");
    if (!(x_max > 0.0)) fail(ErrorKind::Config, "oclp", "test-function basis needs x_max > 0");
    // sum of elements is 1 on [0, (size - 3) h] = [0, x_max + h]
    h_ = x_max / static_cast<double>(size - 4);
}

double TestFunctionBasis::knot(std::size_t j) const noexcept { return (static_cast<double>(j) - 3.0) * h_; }

std::vector<double> TestFunctionBasis::knots() const {
    std::vector<double> k(size_ + 4);
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = (static_cast<double>(j) - 3.0) * h_;
    return k;
}

namespace {

// Uniform cubic B-spline on [0, 4) and its derivatives in the local coordinate.
double bspline(double u) {
    if (u <= 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return u * u * u / 6.0;
    if (u < 2.0) return (-3.0 * u * u * u + 12.0 * u * u - 12.0 * u + 4.0) / 6.0;
    if (u < 3.0) return (3.0 * u * u * u - 24.0 * u * u + 60.0 * u - 44.0) / 6.0;
    const double v = 4.0 - u;
    return v * v * v / 6.0;
}

double bspline_d1(double u) {
    if (u <= 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return 0.5 * u * u;
    if (u < 2.0) return (-9.0 * u * u + 24.0 * u - 12.0) / 6.0;
    if (u < 3.0) return (9.0 * u * u - 48.0 * u + 60.0) / 6.0;
    const double v = 4.0 - u;
    return -0.5 * v * v;
}

double bspline_d2(double u) {
    if (u <= 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return u;
    if (u < 2.0) return -3.0 * u + 4.0;
    if (u < 3.0) return 3.0 * u - 8.0;
    return 4.0 - u;
}

}  // namespace

double TestFunctionBasis::value(std::size_t j, double x) const { return bspline((x - knot(j)) / h_); }
double TestFunctionBasis::d1(std::size_t j, double x) const { return bspline_d1((x - knot(j)) / h_) / h_; }
double TestFunctionBasis::d2(std::size_t j, double x) const { return bspline_d2((x - knot(j)) / h_) / (h_ * h_); }

double generator_of(const ModelSpec& m, const TestFunctionBasis& basis, std::size_t j, double x) {
    return 0.5 * sigma2_at(m, x) * basis.d2(j, x) + drift_at(m, x) * basis.d1(j, x) -
           m.discount() * basis.value(j, x);
}

double harvest_operator_of(const TestFunctionBasis& basis, std::size_t j, double x, double z) {
    if (z == 0.0) return -basis.d1(j, x);
    return (basis.value(j, x - z) - basis.value(j, x)) / z;
}

double psi_extended(const FundamentalSolution& fs, double x) {
    if (x <= 0.0) return 0.0;
    if (fs.has_closed_form() || x >= fs.x_min()) return psi_at(fs, x);
    const double x1 = fs.grid()[0];
    const double p1 = fs.psi()[0];
    const double expo = x1 * fs.dpsi()[0] / p1;  // local exponent of psi ~ x^gamma
    return p1 * std::pow(x / x1, expo);
}

LPInstance build_full_lp(const ModelSpec& m, double x0, const MeasureGrid& grid, const TestFunctionBasis& basis,
                         const FullLPOptions& options) {
    const auto idx = grid.find_state(x0);
    if (!idx) {
        std::ostringstream msg;
        msg << "x0 = " << x0 << " is not a node of the measure grid";
        fail(ErrorKind::Domain, "oclp", msg.str());
    }
    const std::size_t k = basis.size();
    const std::size_t rows = k + 2 + (options.psi_row ? 1 : 0);
    LPInstance lp(rows, grid.n_columns());
    const auto& states = grid.states();
    const auto& atoms = grid.harvest_atoms();

    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < grid.n_tau(); ++t) lp.at(j, grid.tau_col(t)) = basis.value(j, grid.tau_support()[t]);
        for (std::size_t i = 0; i < states.size(); ++i) {
            lp.at(j, grid.running_col(i)) = -generator_of(m, basis, j, states[i]);
        }
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            lp.at(j, grid.harvest_col(a)) = -harvest_operator_of(basis, j, atoms[a].x, atoms[a].z);
        }
        lp.rhs[j] = basis.value(j, x0);
        lp.senses[j] = RowSense::Equal;
        lp.row_names[j] = "basis_" + std::to_string(j);
    }

    const std::size_t tau_row = k, run_row = k + 1;
    for (std::size_t t = 0; t < grid.n_tau(); ++t) lp.at(tau_row, grid.tau_col(t)) = 1.0;
    lp.rhs[tau_row] = 1.0;
    lp.senses[tau_row] = RowSense::LessEqual;
    lp.row_names[tau_row] = "mass_tau";
    for (std::size_t i = 0; i < states.size(); ++i) lp.at(run_row, grid.running_col(i)) = 1.0;
    lp.rhs[run_row] = 1.0 / m.discount();
    lp.senses[run_row] = RowSense::LessEqual;
    lp.row_names[run_row] = "mass_running";

    if (options.psi_row) {
        const FundamentalSolution& fs = *options.psi_row;
        const std::size_t pr = k + 2;
        for (std::size_t t = 0; t < grid.n_tau(); ++t) lp.at(pr, grid.tau_col(t)) = psi_extended(fs, grid.tau_support()[t]);
        for (std::size_t i = 0; i < states.size(); ++i) lp.at(pr, grid.running_col(i)) = -psi_residual_at(m, fs, states[i]);
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            const auto& at = atoms[a];
            lp.at(pr, grid.harvest_col(a)) =
                at.z == 0.0 ? dpsi_at(fs, at.x) : (psi_at(fs, at.x) - psi_extended(fs, at.x - at.z)) / at.z;
        }
        lp.rhs[pr] = psi_at(fs, x0);
        lp.senses[pr] = RowSense::Equal;
        lp.row_names[pr] = "psi";
    }

    for (std::size_t a = 0; a < atoms.size(); ++a) lp.objective[grid.harvest_col(a)] = yield_at(m, atoms[a].x);
    return lp;
}

LPInstance build_aux_lp(const ModelSpec& m, const FundamentalSolution& fs, double x0, const MeasureGrid& grid) {
    if (!(x0 > 0.0)) fail(ErrorKind::Domain, "oclp", "x0 must be > 0");
    const auto& atoms = grid.harvest_atoms();
    LPInstance lp(1, atoms.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        const auto& at = atoms[a];
        lp.at(0, a) = at.z == 0.0 ? dpsi_at(fs, at.x) : (psi_at(fs, at.x) - psi_extended(fs, at.x - at.z)) / at.z;
        lp.objective[a] = yield_at(m, at.x);
    }
    lp.rhs[0] = psi_at(fs, x0);
    lp.senses[0] = RowSense::Equal;
    lp.row_names[0] = "psi";
    return lp;
}

std::string_view to_string(AtomKind k) noexcept {
    switch (k) {
        case AtomKind::Stopped: return "stopped";
        case AtomKind::Running: return "running";
        case AtomKind::Harvest: return "harvest";
    }
    return "unknown";
}

std::vector<SupportAtom> support_of(const MeasureGrid& grid, const LPSolution& sol, bool full, double tol) {
    std::vector<SupportAtom> out;
    if (sol.status != LPStatus::Optimal) return out;
    const auto& atoms = grid.harvest_atoms();
    if (full) {
        for (std::size_t t = 0; t < grid.n_tau(); ++t) {
            const double w = sol.x[grid.tau_col(t)];
            if (w > tol) out.push_back({AtomKind::Stopped, grid.tau_support()[t], 0.0, w});
        }
        for (std::size_t i = 0; i < grid.n_running(); ++i) {
            const double w = sol.x[grid.running_col(i)];
            if (w > tol) out.push_back({AtomKind::Running, grid.states()[i], 0.0, w});
        }
    }
    const std::size_t offset = full ? grid.harvest_col(0) : 0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        const double w = sol.x[offset + a];
        if (w > tol) out.push_back({AtomKind::Harvest, atoms[a].x, atoms[a].z, w});
    }
    return out;
}

Mu1StarReport feasibility_check_mu1star(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                        double x0, std::size_t n_intervals) {
    if (!(x0 > 0.0) || x0 < th.bstar) fail(ErrorKind::Domain, "oclp", "mu1* check needs x0 >= b* and x0 > 0");
    if (n_intervals < 1) fail(ErrorKind::Domain, "oclp", "mu1* check needs at least one interval");
    Mu1StarReport rep;
    rep.n_intervals = n_intervals;
    rep.atom_weight = psi_ratio(fs, th.bstar);
    const double psi_b = th.bstar > 0.0 ? psi_extended(fs, th.bstar) : 0.0;

    double constraint = psi_b;  // psi'(b*) * psi(b*)/psi'(b*)
    double objective = yield_at(m, th.bstar) * rep.atom_weight;
    if (x0 > th.bstar) {
        const double h = (x0 - th.bstar) / static_cast<double>(n_intervals);
        for (std::size_t k = 0; k <= n_intervals; ++k) {
            const double y = k == n_intervals ? x0 : th.bstar + h * static_cast<double>(k);
            const double w = (k == 0 || k == n_intervals) ? 0.5 * h : h;
            constraint += dpsi_at(fs, y) * w;
            objective += yield_at(m, y) * w;
        }
    }
    rep.constraint_residual = constraint - psi_at(fs, x0);
    rep.objective = objective;
    rep.value = value_at(m, fs, th, x0).total;
    return rep;
}

}  // namespace harvest
