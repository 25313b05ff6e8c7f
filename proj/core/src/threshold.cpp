#include "harvest/threshold.hpp"

#include "harvest/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace harvest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> node_ratios(const ModelSpec& m, const FundamentalSolution& fs) {
    const auto g = fs.grid();
    const auto d = fs.dpsi();
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        h[i] = d[i] > 0.0 ? yield_at(m, g[i]) / d[i] : kInf;
    }
    return h;
}

// f(0)/psi'(0+), with psi'(0+) linearly extrapolated when 0 is not tabulated.
double ratio_at_zero(const ModelSpec& m, const FundamentalSolution& fs) {
    double slope0;
    if (fs.has_closed_form() || fs.grid()[0] == 0.0) {
        slope0 = fs.has_closed_form() ? dpsi_at(fs, 0.0) : fs.dpsi()[0];
    } else {
        const auto g = fs.grid();
        const auto d = fs.dpsi();
        slope0 = d[0] - g[0] * (d[1] - d[0]) / (g[1] - g[0]);
    }
    if (!(slope0 > 0.0)) return kInf;
    if (!std::isfinite(slope0)) return 0.0;
    return yield_at(m, 0.0) / slope0;
}

double ratio_at(const ModelSpec& m, const FundamentalSolution& fs, double x) {
    if (x <= 0.0 || (!fs.has_closed_form() && x < fs.x_min())) return ratio_at_zero(m, fs);
    return marginal_ratio(m, fs, x);
}

// sign of d/dx (f/psi')
double ratio_slope_numerator(const ModelSpec& m, const FundamentalSolution& fs, double x) {
    return yield_slope_at(m, x) * dpsi_at(fs, x) - yield_at(m, x) * ddpsi_at(fs, x);
}

}  // namespace

double marginal_ratio(const ModelSpec& m, const FundamentalSolution& fs, double x) {
    return yield_at(m, x) / dpsi_at(fs, x);
}

Threshold find_bstar(const ModelSpec& m, const FundamentalSolution& fs, const ThresholdParams& params) {
    const auto g = fs.grid();
    const std::size_t n = g.size();
    const std::vector<double> h = node_ratios(m, fs);
    const auto best = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());

    if (best == n - 1) {
        fail(ErrorKind::Numeric, "threshold",
             "no admissible b~; condition (i) fails on truncated domain (f/psi' still rising at x_max)");
    }

    Threshold th;
    if (best == 0) {
        th.bstar = 0.0;
        th.h_max = std::max(ratio_at_zero(m, fs), h[0]);
    } else {
        double lo = g[best - 1];
        double hi = g[best + 1];
        const double tol = params.xtol * m.scale();
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = hi - phi * (hi - lo);
        double b = lo + phi * (hi - lo);
        double fa = marginal_ratio(m, fs, a);
        double fb = marginal_ratio(m, fs, b);
        while (hi - lo > tol) {
            if (fa >= fb) {  // ties move left, so plateaus resolve to the smallest maximizer
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = marginal_ratio(m, fs, a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = marginal_ratio(m, fs, b);
            }
        }
        double x = 0.5 * (lo + hi);

        // Polish on the derivative sign: h is flat at its maximum, so comparing
        // values alone cannot locate it below ~sqrt(eps).
        double left = std::max(g[best - 1], x - 16.0 * tol);
        double right = std::min(g[best + 1], x + 16.0 * tol);
        if (ratio_slope_numerator(m, fs, left) > 0.0 && ratio_slope_numerator(m, fs, right) < 0.0) {
            for (int it = 0; it < 200 && right - left > 4.0 * std::numeric_limits<double>::epsilon() * right;
                 ++it) {
                const double mid = 0.5 * (left + right);
                if (ratio_slope_numerator(m, fs, mid) > 0.0) {
                    left = mid;
                } else {
                    right = mid;
                }
            }
            x = 0.5 * (left + right);
        }
        th.bstar = x;
        th.h_max = marginal_ratio(m, fs, x);
        th.at_domain_edge = best == n - 2;
    }
    th.report = verify_conditions(m, fs, th.bstar, params);
    return th;
}

ConditionReport verify_conditions(const ModelSpec& m, const FundamentalSolution& fs, double b,
                                  const ThresholdParams& params) {
    if (!(b >= 0.0 && b <= fs.x_max())) {
        std::ostringstream msg;
        msg << "candidate barrier " << b << " outside [0, " << fs.x_max() << "]";
        fail(ErrorKind::Domain, "threshold", msg.str());
    }
    const auto g = fs.grid();
    const std::size_t n = g.size();
    const std::vector<double> h = node_ratios(m, fs);
    const double hb = ratio_at(m, fs, b);

    ConditionReport rep;
    rep.cond_iii_ok = true;  // every yield family is smooth on (0, inf)
    rep.worst_violation = -kInf;

    // (i)
    const auto arg = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
    double viol_i = std::isinf(hb) ? -1.0 : h[arg] / hb - 1.0;
    if (std::isinf(h[arg]) && !std::isinf(hb)) viol_i = kInf;
    rep.cond_i_ok = viol_i <= params.tol;
    rep.worst_violation = viol_i;
    rep.witness_x = g[arg];

    // (ii): h(b) >= h(first node right of b) >= ... up to tol
    double viol_ii = -kInf, witness_ii = b;
    double prev = hb;
    for (std::size_t i = 0; i < n; ++i) {
        if (g[i] <= b) continue;
        if (std::isfinite(prev) && prev > 0.0) {
            const double v = (h[i] - prev) / prev;
            if (v > viol_ii) {
                viol_ii = v;
                witness_ii = g[i];
            }
        }
        prev = h[i];
    }
    rep.cond_ii_ok = viol_ii <= params.tol;
    if (viol_ii > rep.worst_violation && !rep.cond_ii_ok) {
        rep.worst_violation = viol_ii;
        rep.witness_x = witness_ii;
    } else if (rep.cond_i_ok && rep.cond_ii_ok) {
        rep.worst_violation = std::max(viol_i, viol_ii);
    }
    return rep;
}

}  // namespace harvest
