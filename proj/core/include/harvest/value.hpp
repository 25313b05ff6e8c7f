#pragma once

#include "harvest/model.hpp"
#include "harvest/psi.hpp"
#include "harvest/threshold.hpp"

#include <span>
#include <utility>
#include <vector>

namespace harvest {

enum class Branch { AtOrBelowBstar, AboveBstar };

std::string_view to_string(Branch b) noexcept;

/// Closed-form value split into the instantaneous sweep from x0 down to b*
/// and the discounted harvest from reflecting at b*.
struct ValueBreakdown {
    double x0 = 0.0;
    Branch branch = Branch::AtOrBelowBstar;
    double sweep_term = 0.0;
    double reflect_term = 0.0;
    double total = 0.0;
};

/// f(b*) psi(b*) / psi'(b*), with the x -> 0 limit when b* = 0.
double reflect_value_at_bstar(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th);

ValueBreakdown value_at(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th, double x0);

/// g(x) = int_{b*}^x f(y) dy for x >= b*.
double g_at(const ModelSpec& m, const Threshold& th, double x);

/// Worst-case slack of an inequality sampled on a set of nodes.
struct InequalityReport {
    bool pass = false;
    /// max over nodes of (lhs - rhs); the inequality is lhs <= rhs.
    double max_violation = 0.0;
    double witness_x = 0.0;
    double witness_z = 0.0;
    std::size_t n_checked = 0;
};

/// Checks (A - r) g(x) <= r f(b*) psi(b*)/psi'(b*) at every node, using the
/// analytic f'. Passes when max_violation <= tol * (1 + |rhs|).
InequalityReport check_generator_bound(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                       std::span<const double> grid, double tol = 1e-9);

/// Checks f(x)/psi'(x) <= h_max (z = 0) and f(x) z / (psi(x) - psi(x - z)) <= h_max
/// (z > 0) for every (x, z) pair with 0 <= z <= x. Violations are relative to h_max.
InequalityReport check_density_bound(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                     std::span<const std::pair<double, double>> xz, double tol = 1e-9);

/// f(x)/(-B psi(x, z)): the objective-to-constraint ratio of a harvest atom.
double density_ratio(const ModelSpec& m, const FundamentalSolution& fs, double x, double z);

}  // namespace harvest
