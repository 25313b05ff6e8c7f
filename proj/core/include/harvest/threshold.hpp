#pragma once

#include "harvest/model.hpp"
#include "harvest/psi.hpp"

namespace harvest {

/// Outcome of checking a candidate barrier against the three optimality conditions.
struct ConditionReport {
    /// f/psi' <= f(b)/psi'(b) everywhere on the grid.
    bool cond_i_ok = false;
    /// f/psi' nonincreasing on [b, x_max].
    bool cond_ii_ok = false;
    /// f continuously differentiable on (b, inf); analytic for every yield family.
    bool cond_iii_ok = false;
    /// Largest relative violation seen across (i) and (ii); <= 0 when both hold.
    double worst_violation = 0.0;
    /// Node where worst_violation occurs (the argmax of f/psi' for a cond (i) failure).
    double witness_x = 0.0;

    bool all_ok() const noexcept { return cond_i_ok && cond_ii_ok && cond_iii_ok; }
};

struct Threshold {
    double bstar = 0.0;
    /// f(b*)/psi'(b*); +inf when psi'(0) = 0 and b* = 0.
    double h_max = 0.0;
    /// True when the maximizer sits on the last grid cell (truncation suspect).
    bool at_domain_edge = false;
    ConditionReport report;
};

struct ThresholdParams {
    /// Relative tolerance of the condition checks.
    double tol = 1e-9;
    /// Absolute tolerance of the maximizer, in units of scale.
    double xtol = 1e-8;
};

/// f(x)/psi'(x).
double marginal_ratio(const ModelSpec& m, const FundamentalSolution& fs, double x);

/// Smallest maximizer of f/psi' (grid scan, golden-section refinement, then
/// bisection on the sign of f' psi' - f psi''). Returns b* = 0 when f/psi' is
/// largest at the left end. Throws Numeric when f/psi' still rises at x_max.
Threshold find_bstar(const ModelSpec& m, const FundamentalSolution& fs, const ThresholdParams& params = {});

ConditionReport verify_conditions(const ModelSpec& m, const FundamentalSolution& fs, double b,
                                  const ThresholdParams& params = {});

}  // namespace harvest
