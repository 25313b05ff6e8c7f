#include "harvest/psi.hpp"

#include "harvest/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace harvest {

namespace odeint = boost::numeric::odeint;

double gbm_exponent(double mu, double sigma, double r) {
    // sigma^2/2 g^2 + (mu - sigma^2/2) g - r = 0
    const double a = 0.5 * sigma * sigma;
    const double b = mu - a;
    const double disc = std::sqrt(b * b + 4.0 * a * r);
    // numerically stable form of the positive root
    return b >= 0.0 ? 2.0 * r / (b + disc) : (disc - b) / (2.0 * a);
}

FundamentalSolution::FundamentalSolution(std::vector<double> grid, std::vector<double> psi,
                                         std::vector<double> dpsi, std::vector<double> ddpsi,
                                         std::vector<double> dddpsi, BoundaryClass boundary,
                                         ClosedForm closed_form)
    : grid_(std::move(grid)),
      psi_(std::move(psi)),
      dpsi_(std::move(dpsi)),
      ddpsi_(std::move(ddpsi)),
      dddpsi_(std::move(dddpsi)),
      boundary_(boundary),
      closed_form_(closed_form) {
    const std::size_t n = grid_.size();
    if (n < 4 || psi_.size() != n || dpsi_.size() != n || ddpsi_.size() != n || dddpsi_.size() != n) {
        fail(ErrorKind::Numeric, "psi", "fundamental solution arrays are inconsistent");
    }
}

FundamentalSolution FundamentalSolution::rescaled(double c) const {
    if (!(c > 0.0)) fail(ErrorKind::Domain, "psi", "rescale factor must be > 0");
    FundamentalSolution out = *this;
    for (auto* v : {&out.psi_, &out.dpsi_, &out.ddpsi_, &out.dddpsi_}) {
        for (double& e : *v) e *= c;
    }
    out.factor_ *= c;
    return out;
}

namespace {

struct Derivs {
    double v, d1, d2, d3;
};

Derivs closed_form_eval(const ClosedForm& cf, double x) {
    if (const auto* bm = std::get_if<DriftedBMClosedForm>(&cf)) {
        const double ep = std::exp(bm->lambda_plus * x);
        const double em = std::exp(bm->lambda_minus * x);
        const double lp = bm->lambda_plus, lm = bm->lambda_minus;
        return {ep - em, lp * ep - lm * em, lp * lp * ep - lm * lm * em,
                lp * lp * lp * ep - lm * lm * lm * em};
    }
    const auto& g = std::get<GBMClosedForm>(cf);
    const double gm = g.gamma;
    if (x == 0.0) {
        // limits of the derivatives at 0 depend on gamma; only psi(0) = 0 is needed downstream
        const double d1 = gm > 1.0 ? 0.0 : (gm == 1.0 ? 1.0 : HUGE_VAL);
        return {0.0, d1, gm > 2.0 ? 0.0 : HUGE_VAL, gm > 3.0 ? 0.0 : HUGE_VAL};
    }
    const double p = std::pow(x, gm);
    return {p, gm * p / x, gm * (gm - 1.0) * p / (x * x), gm * (gm - 1.0) * (gm - 2.0) * p / (x * x * x)};
}

// Cubic Hermite on [x0, x1] from values and slopes.
double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * m1;
}

std::size_t locate(std::span<const double> grid, double x) {
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(i, grid.size() - 2);
}

void check_range(const FundamentalSolution& fs, double x) {
    if (!(x >= fs.x_min() && x <= fs.x_max())) {
        std::ostringstream msg;
        msg << "x = " << x << " outside tabulated range [" << fs.x_min() << ", " << fs.x_max() << "]";
        fail(ErrorKind::Domain, "psi", msg.str());
    }
}

std::vector<double> build_grid(const ModelSpec& m, BoundaryClass bc, const GridParams& p, double x_max) {
    const double s = m.scale();
    const double lo = p.log_start * s;
    // hand over to linear spacing no earlier than where the log steps reach the linear step
    const double h_lin = x_max / p.linear_nodes;
    const double ratio = std::pow(10.0, 1.0 / std::max(4, p.log_nodes_per_decade)) - 1.0;
    const double mid = std::min(std::max(p.linear_start * s, h_lin / ratio), 0.5 * x_max);
    if (!(lo > 0.0 && lo < mid)) fail(ErrorKind::Config, "psi", "grid: need 0 < log_start < linear_start");
    if (p.log_nodes_per_decade < 4 || p.linear_nodes < 8) fail(ErrorKind::Config, "psi", "grid too coarse");

    std::vector<double> grid;
    if (bc != BoundaryClass::Natural) grid.push_back(0.0);
    const int n_log = std::max(2, static_cast<int>(std::ceil(std::log10(mid / lo) * p.log_nodes_per_decade)));
    for (int i = 0; i < n_log; ++i) {
        grid.push_back(lo * std::pow(mid / lo, static_cast<double>(i) / n_log));
    }
    for (int i = 0; i <= p.linear_nodes; ++i) {
        grid.push_back(mid + (x_max - mid) * static_cast<double>(i) / p.linear_nodes);
    }
    grid.back() = x_max;
    return grid;
}

// Frobenius series start x^g (1 + c1 x + ...) for drift x (b0 + b1 x), sigma^2 = s2 x^2.
std::array<double, 2> frobenius_start(double b0, double b1, double s2, double r, double x) {
    const double g = gbm_exponent(b0, std::sqrt(s2), r);
    auto q = [&](double e) { return 0.5 * s2 * e * (e - 1.0) + b0 * e - r; };
    double c = 1.0, u = 0.0, du = 0.0, xn = 1.0;
    for (int n = 0; n < 60; ++n) {
        if (n > 0) {
            c *= -b1 * (n - 1 + g) / q(n + g);
            xn *= x;
        }
        const double term = c * xn;
        u += term;
        du += (n + g) * term;
        if (n > 2 && std::abs(term) < 1e-18 * std::abs(u)) break;
    }
    const double xg = std::pow(x, g);
    return {xg * u, xg * du / x};
}

}  // namespace

double psi_at(const FundamentalSolution& fs, double x) {
    if (fs.has_closed_form() && x >= 0.0) return fs.factor_ * closed_form_eval(fs.closed_form_, x).v;
    check_range(fs, x);
    const std::size_t i = locate(fs.grid_, x);
    return hermite(fs.grid_[i], fs.grid_[i + 1], fs.psi_[i], fs.psi_[i + 1], fs.dpsi_[i], fs.dpsi_[i + 1], x);
}

double dpsi_at(const FundamentalSolution& fs, double x) {
    if (fs.has_closed_form() && x >= 0.0) return fs.factor_ * closed_form_eval(fs.closed_form_, x).d1;
    check_range(fs, x);
    const std::size_t i = locate(fs.grid_, x);
    return hermite(fs.grid_[i], fs.grid_[i + 1], fs.dpsi_[i], fs.dpsi_[i + 1], fs.ddpsi_[i], fs.ddpsi_[i + 1],
                   x);
}

double ddpsi_at(const FundamentalSolution& fs, double x) {
    if (fs.has_closed_form() && x >= 0.0) return fs.factor_ * closed_form_eval(fs.closed_form_, x).d2;
    check_range(fs, x);
    const std::size_t i = locate(fs.grid_, x);
    return hermite(fs.grid_[i], fs.grid_[i + 1], fs.ddpsi_[i], fs.ddpsi_[i + 1], fs.dddpsi_[i],
                   fs.dddpsi_[i + 1], x);
}

double psi_residual_at(const ModelSpec& m, const FundamentalSolution& fs, double x) {
    return 0.5 * sigma2_at(m, x) * ddpsi_at(fs, x) + drift_at(m, x) * dpsi_at(fs, x) -
           m.discount() * psi_at(fs, x);
}

double psi_ratio_at_zero(const FundamentalSolution& fs) {
    if (fs.has_closed_form()) return 0.0;  // both closed forms have psi/psi' -> 0
    const auto g = fs.grid();
    const auto p = fs.psi();
    const auto d = fs.dpsi();
    if (g[0] == 0.0 && d[0] > 0.0) return p[0] / d[0];
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        double w = 1.0;
        for (int j = 0; j < 3; ++j) {
            if (j != i) w *= (0.0 - g[j]) / (g[i] - g[j]);
        }
        acc += w * p[i] / d[i];
    }
    return std::max(0.0, acc);
}

double psi_ratio(const FundamentalSolution& fs, double x) {
    if (x <= 0.0 || (!fs.has_closed_form() && x <= fs.x_min())) return psi_ratio_at_zero(fs);
    return psi_at(fs, x) / dpsi_at(fs, x);
}

FundamentalSolution solve_fundamental(const ModelSpec& m, BoundaryClass bc, const GridParams& params) {
    const double s = m.scale();
    const double x_max = params.x_max > 0.0 ? params.x_max : 10.0 * std::max(s, params.x_hint);
    const std::vector<double> grid = build_grid(m, bc, params, x_max);
    const std::size_t n = grid.size();
    const double r = m.discount();

    ClosedForm cf;
    if (params.use_closed_form) {
        if (const auto* bm = std::get_if<DriftedBM>(&m.family()); bm && bc == BoundaryClass::Regular) {
            const double a = 0.5 * bm->sigma * bm->sigma;
            const double disc = std::sqrt(bm->mu * bm->mu + 4.0 * a * r);
            cf = DriftedBMClosedForm{(-bm->mu + disc) / (2.0 * a), (-bm->mu - disc) / (2.0 * a)};
        } else if (const auto* gbm = std::get_if<GBM>(&m.family()); gbm && bc == BoundaryClass::Natural) {
            cf = GBMClosedForm{gbm_exponent(gbm->mu, gbm->sigma, r)};
        }
    }

    std::vector<double> psi(n), dpsi(n), ddpsi(n), dddpsi(n);
    if (cf.index() != 0) {
        for (std::size_t i = 0; i < n; ++i) {
            const Derivs d = closed_form_eval(cf, grid[i]);
            psi[i] = d.v;
            dpsi[i] = d.d1;
            ddpsi[i] = d.d2;
            dddpsi[i] = d.d3;
        }
    } else {
        using State = std::array<double, 2>;
        State y{};
        if (bc == BoundaryClass::Natural) {
            double b0 = 0.0, b1 = 0.0, s2 = 0.0;
            if (const auto* gbm = std::get_if<GBM>(&m.family())) {
                b0 = gbm->mu;
                s2 = gbm->sigma * gbm->sigma;
            } else if (const auto* lg = std::get_if<Logistic>(&m.family())) {
                b0 = lg->mu;
                b1 = -lg->mu / lg->capacity;
                s2 = lg->sigma * lg->sigma;
            } else {
                fail(ErrorKind::Numeric, "psi", "no asymptotic start known for a natural boundary of this family");
            }
            y = frobenius_start(b0, b1, s2, r, grid[0]);
        } else {
            if (!(sigma2_at(m, 0.0) > 0.0)) {
                fail(ErrorKind::Numeric, "psi", "degenerate diffusion at an accessible 0 is not supported");
            }
            y = {0.0, 1.0};
        }

        auto rhs = [&m, r](const State& u, State& du, double x) {
            du[0] = u[1];
            du[1] = 2.0 * (r * u[0] - drift_at(m, x) * u[1]) / sigma2_at(m, x);
        };
        std::size_t k = 0;
        auto observe = [&](const State& u, double) {
            psi[k] = u[0];
            dpsi[k] = u[1];
            ++k;
        };
        auto stepper = odeint::make_dense_output(params.atol, params.rtol, odeint::runge_kutta_dopri5<State>());
        const double dx0 = (grid[1] - grid[0]) * 0.1;
        odeint::integrate_times(stepper, rhs, y, grid.begin(), grid.end(), dx0, observe);
        if (k != n) fail(ErrorKind::Numeric, "psi", "ODE integration stopped early");

        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid[i];
            const double s2 = sigma2_at(m, x);
            ddpsi[i] = 2.0 * (r * psi[i] - drift_at(m, x) * dpsi[i]) / s2;
            dddpsi[i] = 2.0 *
                        (r * dpsi[i] - drift_slope_at(m, x) * dpsi[i] - drift_at(m, x) * ddpsi[i] -
                         0.5 * sigma2_slope_at(m, x) * ddpsi[i]) /
                        s2;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(psi[i]) || !std::isfinite(dpsi[i]) || !std::isfinite(ddpsi[i])) {
                std::ostringstream msg;
                msg << "psi overflowed at x = " << grid[i] << "; reduce x_max";
                fail(ErrorKind::Numeric, "psi", msg.str());
            }
        }
        // psi'(anchor) = 1
        const double anchor = std::clamp(s, grid[1], grid[n - 2]);
        const std::size_t j = locate(grid, anchor);
        const double slope =
            hermite(grid[j], grid[j + 1], dpsi[j], dpsi[j + 1], ddpsi[j], ddpsi[j + 1], anchor);
        if (!(slope > 0.0)) fail(ErrorKind::Numeric, "psi", "increasing solution not isolated; refine grid or check parameters");
        for (auto* v : {&psi, &dpsi, &ddpsi, &dddpsi}) {
            for (double& e : *v) e /= slope;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const bool at_zero = grid[i] == 0.0;
        if (!(dpsi[i] > 0.0) || (i > 0 && !(psi[i] > psi[i - 1]))) {
            if (at_zero && dpsi[i] >= 0.0) continue;
            std::ostringstream msg;
            msg << "increasing solution not isolated; refine grid or check parameters (psi' <= 0 near x = "
                << grid[i] << ")";
            fail(ErrorKind::Numeric, "psi", msg.str());
        }
    }
    if (bc == BoundaryClass::Natural && psi[0] > 1e-3 * psi[n - 1]) {
        fail(ErrorKind::Numeric, "psi", "psi(x_min) is not small relative to psi(x_max); psi(0) = 0 not resolved");
    }

    FundamentalSolution fs(grid, std::move(psi), std::move(dpsi), std::move(ddpsi), std::move(dddpsi), bc, cf);

    // Residual at cell midpoints exercises the interpolants, not just the nodes.
    double worst = 0.0, worst_x = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double x = 0.5 * (grid[i] + grid[i + 1]);
        // relative to the size of the individual terms, so fast-growing psi is not penalised
        const double terms = std::abs(0.5 * sigma2_at(m, x) * ddpsi_at(fs, x)) +
                             std::abs(drift_at(m, x) * dpsi_at(fs, x)) + std::abs(r * psi_at(fs, x));
        const double res = std::abs(psi_residual_at(m, fs, x)) / (1e-300 + terms);
        if (res > worst) {
            worst = res;
            worst_x = x;
        }
    }
    if (!(worst <= params.residual_tol)) {
        std::ostringstream msg;
        msg << "ODE residual " << worst << " exceeds tolerance " << params.residual_tol << " at x = " << worst_x;
        fail(ErrorKind::Numeric, "psi", msg.str());
    }
    return fs;
}

}  // namespace harvest
