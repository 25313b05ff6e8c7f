#pragma once

#include <string_view>
#include <variant>
#include <vector>

namespace harvest {

/// dX = mu dt + sigma dW.
struct DriftedBM {
    double mu = 0.0;
    double sigma = 1.0;
};

/// dX = mu X dt + sigma X dW.
struct GBM {
    double mu = 0.0;
    double sigma = 1.0;
};

/// dX = mu X (1 - X/K) dt + sigma X dW.
struct Logistic {
    double mu = 1.0;
    double capacity = 1.0;
    double sigma = 1.0;
};

using Family = std::variant<DriftedBM, GBM, Logistic>;

/// f(x) = p.
struct ConstantYield {
    double p = 1.0;
};

/// f(x) = p exp(-alpha x).
struct ExponentialYield {
    double p = 1.0;
    double alpha = 0.0;
};

/// f(x) = p / (1 + alpha x).
struct RationalYield {
    double p = 1.0;
    double alpha = 0.0;
};

using YieldFn = std::variant<ConstantYield, ExponentialYield, RationalYield>;

/// Diffusion, discount rate and marginal yield of a harvesting problem.
///
/// The constructor validates the parameterization (sigma > 0, r > 0, p > 0,
/// alpha >= 0, K > 0, logistic mu > 0) and throws a Config error otherwise.
/// Under these restrictions every family has at most linear growth in the
/// coefficients, so +infinity is a natural boundary.
class ModelSpec {
public:
    ModelSpec(Family family, double discount, YieldFn yield);

    const Family& family() const noexcept { return family_; }
    const YieldFn& yield() const noexcept { return yield_; }
    double discount() const noexcept { return discount_; }

    /// Characteristic length of the state variable (K for logistic, 1 otherwise).
    double scale() const noexcept;

    std::string_view family_name() const noexcept;
    std::string_view yield_name() const noexcept;

private:
    Family family_;
    double discount_;
    YieldFn yield_;
};

double drift_at(const ModelSpec& m, double x);
double drift_slope_at(const ModelSpec& m, double x);
double sigma2_at(const ModelSpec& m, double x);
double sigma2_slope_at(const ModelSpec& m, double x);

double yield_at(const ModelSpec& m, double x);
/// Analytic f'(x).
double yield_slope_at(const ModelSpec& m, double x);
/// Closed-form integral of f over [a, b] (negative when b < a).
double yield_integral(const ModelSpec& m, double a, double b);

enum class BoundaryClass { Exit, Natural, Regular };

std::string_view to_string(BoundaryClass bc) noexcept;

/// Controls the Feller-integral sweep near 0.
struct IntegrationParams {
    /// Lower cutoffs of the sweep, largest first.
    std::vector<double> epsilons{1e-4, 1e-6, 1e-8};
    /// Log-grid resolution of the trapezoid quadrature.
    int nodes_per_decade = 200;
    /// Upper end of the integrals, in units of ModelSpec::scale().
    double x_ref = 1.0;
    /// Increment ratio at or below which an integral counts as convergent.
    double converge_ratio = 0.5;
    /// Increment ratio at or above which an integral counts as divergent.
    double diverge_ratio = 0.9;
};

/// Raw sweep data behind a classification, kept for diagnostics.
struct FellerSweep {
    std::vector<double> epsilons;
    /// log of Sigma(eps) = int_eps^c s(y) M(eps, y] dy (reachability of 0).
    std::vector<double> log_sigma;
    /// log of N(eps) = int_eps^c m(y) S(eps, y] dy (ability to leave 0).
    std::vector<double> log_n;
    bool sigma_finite = false;
    bool n_finite = false;
};

FellerSweep feller_sweep(const ModelSpec& m, const IntegrationParams& probe = {});

/// Feller classification of the boundary at 0.
///
/// Throws Numeric when an integral's increments sit between the convergence
/// and divergence ratios, and Config when 0 is an entrance boundary.
BoundaryClass classify_boundary_zero(const ModelSpec& m, const IntegrationParams& probe = {});

}  // namespace harvest
