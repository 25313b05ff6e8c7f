#include "harvest/model.hpp"

#include "harvest/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace harvest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::Config, "model", what);
}

bool finite(double v) { return std::isfinite(v); }

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

ModelSpec::ModelSpec(Family family, double discount, YieldFn yield)
    : family_(family), discount_(discount), yield_(yield) {
    require(finite(discount_) && discount_ > 0.0, "discount r must be > 0");
    std::visit(overloaded{
                   [](const DriftedBM& p) {
                       require(finite(p.mu), "drifted_bm: mu must be finite");
                       require(finite(p.sigma) && p.sigma > 0.0, "drifted_bm: sigma must be > 0");
                   },
                   [](const GBM& p) {
                       require(finite(p.mu), "gbm: mu must be finite");
                       require(finite(p.sigma) && p.sigma > 0.0, "gbm: sigma must be > 0");
                   },
                   [](const Logistic& p) {
                       require(finite(p.mu) && p.mu > 0.0, "logistic: mu must be > 0");
                       require(finite(p.capacity) && p.capacity > 0.0, "logistic: K must be > 0");
                       require(finite(p.sigma) && p.sigma > 0.0, "logistic: sigma must be > 0");
                   },
               },
               family_);
    std::visit(overloaded{
                   [](const ConstantYield& y) {
                       require(finite(y.p) && y.p > 0.0, "yield: p must be > 0");
                   },
                   [](const ExponentialYield& y) {
                       require(finite(y.p) && y.p > 0.0, "yield: p must be > 0");
                       require(finite(y.alpha) && y.alpha >= 0.0, "yield: alpha must be >= 0");
                   },
                   [](const RationalYield& y) {
                       require(finite(y.p) && y.p > 0.0, "yield: p must be > 0");
                       require(finite(y.alpha) && y.alpha >= 0.0, "yield: alpha must be >= 0");
                   },
               },
               yield_);
}

double ModelSpec::scale() const noexcept {
    if (const auto* lg = std::get_if<Logistic>(&family_)) return lg->capacity;
    return 1.0;
}

std::string_view ModelSpec::family_name() const noexcept {
    return std::visit(overloaded{
                          [](const DriftedBM&) { return std::string_view{"drifted_bm"}; },
                          [](const GBM&) { return std::string_view{"gbm"}; },
                          [](const Logistic&) { return std::string_view{"logistic"}; },
                      },
                      family_);
}

std::string_view ModelSpec::yield_name() const noexcept {
    return std::visit(overloaded{
                          [](const ConstantYield&) { return std::string_view{"constant"}; },
                          [](const ExponentialYield&) { return std::string_view{"exponential"}; },
                          [](const RationalYield&) { return std::string_view{"rational"}; },
                      },
                      yield_);
}

double drift_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const DriftedBM& p) { return p.mu; },
                          [x](const GBM& p) { return p.mu * x; },
                          [x](const Logistic& p) { return p.mu * x * (1.0 - x / p.capacity); },
                      },
                      m.family());
}

double drift_slope_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const DriftedBM&) { return 0.0; },
                          [](const GBM& p) { return p.mu; },
                          [x](const Logistic& p) { return p.mu * (1.0 - 2.0 * x / p.capacity); },
                      },
                      m.family());
}

double sigma2_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const DriftedBM& p) { return p.sigma * p.sigma; },
                          [x](const GBM& p) { return p.sigma * p.sigma * x * x; },
                          [x](const Logistic& p) { return p.sigma * p.sigma * x * x; },
                      },
                      m.family());
}

double sigma2_slope_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const DriftedBM&) { return 0.0; },
                          [x](const GBM& p) { return 2.0 * p.sigma * p.sigma * x; },
                          [x](const Logistic& p) { return 2.0 * p.sigma * p.sigma * x; },
                      },
                      m.family());
}

double yield_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const ConstantYield& y) { return y.p; },
                          [x](const ExponentialYield& y) { return y.p * std::exp(-y.alpha * x); },
                          [x](const RationalYield& y) { return y.p / (1.0 + y.alpha * x); },
                      },
                      m.yield());
}

double yield_slope_at(const ModelSpec& m, double x) {
    return std::visit(overloaded{
                          [](const ConstantYield&) { return 0.0; },
                          [x](const ExponentialYield& y) {
                              return -y.alpha * y.p * std::exp(-y.alpha * x);
                          },
                          [x](const RationalYield& y) {
                              const double d = 1.0 + y.alpha * x;
                              return -y.alpha * y.p / (d * d);
                          },
                      },
                      m.yield());
}

double yield_integral(const ModelSpec& m, double a, double b) {
    return std::visit(overloaded{
                          [a, b](const ConstantYield& y) { return y.p * (b - a); },
                          [a, b](const ExponentialYield& y) {
                              if (y.alpha == 0.0) return y.p * (b - a);
                              return -y.p * std::exp(-y.alpha * a) * std::expm1(-y.alpha * (b - a)) /
                                     y.alpha;
                          },
                          [a, b](const RationalYield& y) {
                              if (y.alpha == 0.0) return y.p * (b - a);
                              return y.p / y.alpha * std::log1p(y.alpha * (b - a) / (1.0 + y.alpha * a));
                          },
                      },
                      m.yield());
}

std::string_view to_string(BoundaryClass bc) noexcept {
    switch (bc) {
        case BoundaryClass::Exit: return "exit";
        case BoundaryClass::Natural: return "natural";
        case BoundaryClass::Regular: return "regular";
    }
    return "unknown";
}

namespace {

enum class Convergence { Finite, Infinite, Ambiguous };

// Classifies I(eps_0) <= I(eps_1) <= ... from the ratio of successive increments.
// A convergent integrand ~ y^(a-1) gives ratio 100^(-a); a log divergence gives 1.
Convergence classify_sequence(const std::vector<double>& logs, const IntegrationParams& probe) {
    const std::size_t n = logs.size();
    if (!std::isfinite(logs[n - 1]) || logs[n - 1] > 700.0) return Convergence::Infinite;
    const double d_last = logs[n - 1] - logs[n - 2];
    const double d_prev = logs[n - 2] - logs[n - 3];
    // relative size of the last increment
    if (-std::expm1(-d_last) <= 1e-9) return Convergence::Finite;
    if (d_prev <= 0.0) return Convergence::Infinite;
    const double ratio = std::expm1(d_last) / std::expm1(d_prev) * std::exp(d_prev);
    if (ratio <= probe.converge_ratio) return Convergence::Finite;
    if (ratio >= probe.diverge_ratio) return Convergence::Infinite;
    return Convergence::Ambiguous;
}

}  // namespace

FellerSweep feller_sweep(const ModelSpec& m, const IntegrationParams& probe) {
    if (probe.epsilons.size() < 3) fail(ErrorKind::Config, "model", "boundary probe needs >= 3 epsilons");
    if (probe.nodes_per_decade < 10) fail(ErrorKind::Config, "model", "boundary probe resolution too low");
    std::vector<double> eps = probe.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());

    const double c = probe.x_ref * m.scale();
    const double lo = eps.back() * m.scale();
    const double du = std::log(10.0) / probe.nodes_per_decade;
    const auto n_nodes = static_cast<std::size_t>(std::ceil(std::log(c / lo) / du)) + 1;
    const double u0 = std::log(c) - du * static_cast<double>(n_nodes - 1);

    // Nodes run from ~lo up to c exactly. All densities are kept in log form
    // since s(x) behaves like x^(-2 mu / sigma^2) near 0 for GBM-type models.
    std::vector<double> x(n_nodes), log_s(n_nodes), log_m(n_nodes);
    std::vector<double> a(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        x[i] = std::exp(u0 + du * static_cast<double>(i));
        a[i] = 2.0 * drift_at(m, x[i]) / sigma2_at(m, x[i]) * x[i];  // d/du of int 2b/sigma^2
    }
    // log s(x) = -int_c^x 2b/sigma^2, accumulated downward from c.
    log_s[n_nodes - 1] = 0.0;
    for (std::size_t i = n_nodes - 1; i-- > 0;) {
        log_s[i] = log_s[i + 1] + 0.5 * du * (a[i] + a[i + 1]);
    }
    for (std::size_t i = 0; i < n_nodes; ++i) {
        log_m[i] = -std::log(sigma2_at(m, x[i])) - log_s[i];
    }

    FellerSweep out;
    out.epsilons = eps;
    const double log_half_du = std::log(0.5 * du);
    for (double e : eps) {
        const double cut = e * m.scale();
        std::size_t start = 0;
        while (start < n_nodes && x[start] < cut * (1.0 - 1e-12)) ++start;
        const double ninf = -std::numeric_limits<double>::infinity();
        double log_big_s = ninf, log_big_m = ninf;  // running S(cut, x], M(cut, x]
        double log_sigma = ninf, log_n = ninf;
        double prev_sig = ninf, prev_n = ninf;  // integrands at the previous node (log)
        for (std::size_t i = start; i < n_nodes; ++i) {
            const double lu = std::log(x[i]);
            if (i > start) {
                const double ls_prev = log_s[i - 1] + std::log(x[i - 1]);
                const double lm_prev = log_m[i - 1] + std::log(x[i - 1]);
                log_big_s = log_add(log_big_s, log_half_du + log_add(ls_prev, log_s[i] + lu));
                log_big_m = log_add(log_big_m, log_half_du + log_add(lm_prev, log_m[i] + lu));
            }
            const double sig_i = log_s[i] + lu + log_big_m;
            const double n_i = log_m[i] + lu + log_big_s;
            if (i > start) {
                log_sigma = log_add(log_sigma, log_half_du + log_add(prev_sig, sig_i));
                log_n = log_add(log_n, log_half_du + log_add(prev_n, n_i));
            }
            prev_sig = sig_i;
            prev_n = n_i;
        }
        out.log_sigma.push_back(log_sigma);
        out.log_n.push_back(log_n);
    }

    const Convergence cs = classify_sequence(out.log_sigma, probe);
    const Convergence cn = classify_sequence(out.log_n, probe);
    if (cs == Convergence::Ambiguous || cn == Convergence::Ambiguous) {
        std::ostringstream msg;
        msg << "Feller integrals near 0 are numerically ambiguous (sigma: "
            << (cs == Convergence::Ambiguous ? "ambiguous" : "decided") << ", N: "
            << (cn == Convergence::Ambiguous ? "ambiguous" : "decided")
            << "); refine the probe with smaller epsilons or more nodes per decade";
        fail(ErrorKind::Numeric, "model", msg.str());
    }
    out.sigma_finite = cs == Convergence::Finite;
    out.n_finite = cn == Convergence::Finite;
    return out;
}

BoundaryClass classify_boundary_zero(const ModelSpec& m, const IntegrationParams& probe) {
    const FellerSweep sw = feller_sweep(m, probe);
    if (sw.sigma_finite && sw.n_finite) return BoundaryClass::Regular;
    if (sw.sigma_finite) return BoundaryClass::Exit;
    if (sw.n_finite) {
        fail(ErrorKind::Config, "model",
             "0 is an entrance boundary; extinction must be permanent (exit or natural 0)");
    }
    return BoundaryClass::Natural;
}

}  // namespace harvest
