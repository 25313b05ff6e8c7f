#pragma once

#include "harvest/model.hpp"
#include "harvest/psi.hpp"
#include "harvest/simplex.hpp"
#include "harvest/threshold.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace harvest {

struct MeasureGridParams {
    /// Uniformly spaced states on (0, x_max], before extra nodes are merged in.
    std::size_t n_states = 120;
    /// Positive jump sizes per state, geometric from z_min up to the full state.
    int jump_levels = 16;
    /// <= 0 selects max(4 x0, 4 b*, 10 scale).
    double x_max = 0.0;
    /// Smallest positive jump, relative to the state.
    double z_min_rel = 1e-6;
    /// Also give the stopped-state measure atoms at positive states (always at 0).
    bool tau_at_states = true;
};

/// Atoms of the three occupation measures on a finite grid.
///
/// Column layout of the LP: [tau atoms | running atoms | harvest atoms].
class MeasureGrid {
public:
    MeasureGrid(std::vector<double> states, std::vector<std::vector<double>> jumps, std::size_t x0_index,
                bool tau_at_states);

    const std::vector<double>& states() const noexcept { return states_; }
    /// Jump sizes available at state i; jumps(i)[0] == 0.
    const std::vector<double>& jumps(std::size_t i) const { return jumps_[i]; }
    std::size_t x0_index() const noexcept { return x0_index_; }
    double x0() const { return states_[x0_index_]; }
    double x_max() const { return states_.back(); }

    /// Locations of tau atoms (0 first).
    const std::vector<double>& tau_support() const noexcept { return tau_support_; }
    std::size_t n_tau() const noexcept { return tau_support_.size(); }
    std::size_t n_running() const noexcept { return states_.size(); }
    std::size_t n_harvest() const noexcept { return harvest_.size(); }
    std::size_t n_columns() const noexcept { return n_tau() + n_running() + n_harvest(); }

    std::size_t tau_col(std::size_t k) const noexcept { return k; }
    std::size_t running_col(std::size_t i) const noexcept { return n_tau() + i; }
    std::size_t harvest_col(std::size_t a) const noexcept { return n_tau() + n_running() + a; }

    struct HarvestAtom {
        std::size_t state = 0;
        double x = 0.0;
        double z = 0.0;
    };
    const std::vector<HarvestAtom>& harvest_atoms() const noexcept { return harvest_; }

    /// Index of a state equal to x (relative tolerance 1e-12), if present.
    std::optional<std::size_t> find_state(double x) const;

private:
    std::vector<double> states_;
    std::vector<std::vector<double>> jumps_;
    std::size_t x0_index_;
    std::vector<double> tau_support_;
    std::vector<HarvestAtom> harvest_;
};

/// States (0, x_max] with x0 and the extra nodes (e.g. b*) inserted exactly.
MeasureGrid make_measure_grid(const ModelSpec& m, double x0, const std::vector<double>& extra_nodes,
                              double bstar_hint, const MeasureGridParams& params = {});

/// Uniform cubic B-splines whose sum is 1 on [0, x_max + pad].
class TestFunctionBasis {
public:
    TestFunctionBasis(double x_max, std::size_t size);

    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept { return h_; }
    /// Left end of element j's support.
    double knot(std::size_t j) const noexcept;
    std::vector<double> knots() const;

    double value(std::size_t j, double x) const;
    double d1(std::size_t j, double x) const;
    double d2(std::size_t j, double x) const;

private:
    std::size_t size_;
    double h_;
};

/// (A - r) g(x) for basis element j.
double generator_of(const ModelSpec& m, const TestFunctionBasis& basis, std::size_t j, double x);
/// B g(x, z): -g'(x) at z = 0, (g(x - z) - g(x)) / z otherwise.
double harvest_operator_of(const TestFunctionBasis& basis, std::size_t j, double x, double z);

struct FullLPOptions {
    /// Append the constraint generated by psi itself (see README); null omits it.
    const FundamentalSolution* psi_row = nullptr;
};

/// One equality row per basis element, then mu_tau(S) <= 1 and mu_0(S) <= 1/r,
/// then the optional psi row. Objective sum f(x) mu_1.
LPInstance build_full_lp(const ModelSpec& m, double x0, const MeasureGrid& grid, const TestFunctionBasis& basis,
                         const FullLPOptions& options = {});

/// Single row -int B psi d mu_1 = psi(x0) over the harvest atoms only.
LPInstance build_aux_lp(const ModelSpec& m, const FundamentalSolution& fs, double x0, const MeasureGrid& grid);

/// psi on [0, x_max], extended below a natural boundary's first node by the local power law.
double psi_extended(const FundamentalSolution& fs, double x);

enum class AtomKind { Stopped, Running, Harvest };
std::string_view to_string(AtomKind k) noexcept;

struct SupportAtom {
    AtomKind kind = AtomKind::Harvest;
    double x = 0.0;
    double z = 0.0;
    double weight = 0.0;
};

/// Nonzero atoms of a full-LP solution (harvest atoms only when full == false).
std::vector<SupportAtom> support_of(const MeasureGrid& grid, const LPSolution& sol, bool full, double tol = 1e-12);

struct Mu1StarReport {
    std::size_t n_intervals = 0;
    /// sum psi' w + psi'(b*) psi(b*)/psi'(b*) - psi(x0).
    double constraint_residual = 0.0;
    /// sum f w + f(b*) psi(b*)/psi'(b*).
    double objective = 0.0;
    /// Closed-form value at x0.
    double value = 0.0;
    double atom_weight = 0.0;
};

/// Trapezoid discretization of Lebesgue measure on [b*, x0] at z = 0 plus the
/// atom psi(b*)/psi'(b*) at (b*, 0), checked against the auxiliary constraint.
Mu1StarReport feasibility_check_mu1star(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                        double x0, std::size_t n_intervals);

}  // namespace harvest
