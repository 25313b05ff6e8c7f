#include "harvest/value.hpp"

#include "harvest/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace harvest {

std::string_view to_string(Branch b) noexcept {
    return b == Branch::AtOrBelowBstar ? "at_or_below_bstar" : "above_bstar";
}

double reflect_value_at_bstar(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th) {
    return yield_at(m, th.bstar) * psi_ratio(fs, th.bstar);
}

ValueBreakdown value_at(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th, double x0) {
    if (!(x0 > 0.0)) {
        std::ostringstream msg;
        msg << "initial population x0 must be > 0 (got " << x0 << ")";
        fail(ErrorKind::Domain, "value", msg.str());
    }
    ValueBreakdown v;
    v.x0 = x0;
    if (x0 <= th.bstar) {
        v.branch = Branch::AtOrBelowBstar;
        v.sweep_term = 0.0;
        // f(b*) psi(x0) / psi'(b*); b* > 0 here so psi'(b*) is tabulated
        v.reflect_term = yield_at(m, th.bstar) * psi_at(fs, x0) / dpsi_at(fs, th.bstar);
    } else {
        v.branch = Branch::AboveBstar;
        v.sweep_term = yield_integral(m, th.bstar, x0);
        v.reflect_term = reflect_value_at_bstar(m, fs, th);
    }
    v.total = v.sweep_term + v.reflect_term;
    return v;
}

double g_at(const ModelSpec& m, const Threshold& th, double x) {
    if (!(x >= th.bstar)) {
        std::ostringstream msg;
        msg << "g is defined for x >= b* = " << th.bstar << " (got " << x << ")";
        fail(ErrorKind::Domain, "value", msg.str());
    }
    return yield_integral(m, th.bstar, x);
}

InequalityReport check_generator_bound(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                       std::span<const double> grid, double tol) {
    const double rhs = m.discount() * reflect_value_at_bstar(m, fs, th);
    InequalityReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    for (double x : grid) {
        if (!(x > th.bstar)) continue;
        const double lhs = 0.5 * sigma2_at(m, x) * yield_slope_at(m, x) + drift_at(m, x) * yield_at(m, x) -
                           m.discount() * g_at(m, th, x);
        const double viol = lhs - rhs;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.witness_x = x;
        }
        ++rep.n_checked;
    }
    rep.pass = rep.n_checked > 0 && rep.max_violation <= tol * (1.0 + std::abs(rhs));
    return rep;
}

double density_ratio(const ModelSpec& m, const FundamentalSolution& fs, double x, double z) {
    if (z == 0.0) return yield_at(m, x) / dpsi_at(fs, x);
    const double lower = x - z <= 0.0 ? 0.0 : psi_at(fs, x - z);
    const double diff = psi_at(fs, x) - lower;
    if (!(diff > 0.0)) {
        std::ostringstream msg;
        msg << "psi(x) - psi(x - z) <= 0 at x = " << x << ", z = " << z << " contradicts strict monotonicity";
        fail(ErrorKind::Numeric, "value", msg.str());
    }
    return yield_at(m, x) * z / diff;
}

InequalityReport check_density_bound(const ModelSpec& m, const FundamentalSolution& fs, const Threshold& th,
                                     std::span<const std::pair<double, double>> xz, double tol) {
    InequalityReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const bool unbounded = std::isinf(th.h_max);
    for (const auto& [x, z] : xz) {
        if (!(z >= 0.0 && z <= x)) {
            fail(ErrorKind::Domain, "value", "density bound pairs need 0 <= z <= x");
        }
        const double ratio = density_ratio(m, fs, x, z);
        const double viol = unbounded ? -1.0 : ratio / th.h_max - 1.0;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.witness_x = x;
            rep.witness_z = z;
        }
        ++rep.n_checked;
    }
    rep.pass = rep.n_checked > 0 && rep.max_violation <= tol;
    return rep;
}

}  // namespace harvest
