#pragma once

#include "harvest/model.hpp"

#include <span>
#include <variant>
#include <vector>

namespace harvest {

/// psi(x) = exp(lambda_plus x) - exp(lambda_minus x); 0 is regular.
struct DriftedBMClosedForm {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
};

/// psi(x) = x^gamma; 0 is natural.
struct GBMClosedForm {
    double gamma = 0.0;
};

using ClosedForm = std::variant<std::monostate, DriftedBMClosedForm, GBMClosedForm>;

struct GridParams {
    /// Right end of the grid; <= 0 selects 10 * max(scale, x_hint).
    double x_max = 0.0;
    /// Largest state of interest (initial populations, a threshold guess).
    double x_hint = 0.0;
    /// First positive node, in units of scale.
    double log_start = 1e-6;
    /// Where log spacing hands over to linear spacing, in units of scale.
    double linear_start = 0.1;
    int log_nodes_per_decade = 40;
    int linear_nodes = 2000;
    /// Use the analytic solution when the family has one.
    bool use_closed_form = true;
    double rtol = 1e-11;
    double atol = 1e-14;
    /// Bound on |(A - r) psi| relative to the sum of its term magnitudes, at cell midpoints.
    double residual_tol = 1e-6;
};

/// Increasing solution psi of (A - r) u = 0 with psi(0) = 0, tabulated with
/// its first three derivatives. psi is fixed only up to a positive factor:
/// closed forms are used unscaled, integrated solutions are scaled so that
/// psi'(anchor) = 1.
class FundamentalSolution {
public:
    FundamentalSolution(std::vector<double> grid, std::vector<double> psi, std::vector<double> dpsi,
                        std::vector<double> ddpsi, std::vector<double> dddpsi, BoundaryClass boundary,
                        ClosedForm closed_form);

    std::span<const double> grid() const noexcept { return grid_; }
    std::span<const double> psi() const noexcept { return psi_; }
    std::span<const double> dpsi() const noexcept { return dpsi_; }
    std::span<const double> ddpsi() const noexcept { return ddpsi_; }
    std::span<const double> dddpsi() const noexcept { return dddpsi_; }
    BoundaryClass boundary() const noexcept { return boundary_; }
    const ClosedForm& closed_form() const noexcept { return closed_form_; }
    bool has_closed_form() const noexcept { return closed_form_.index() != 0; }

    double x_min() const noexcept { return grid_.front(); }
    double x_max() const noexcept { return grid_.back(); }

    /// Returns a copy with psi and all derivatives multiplied by c > 0.
    FundamentalSolution rescaled(double c) const;

private:
    std::vector<double> grid_;
    std::vector<double> psi_, dpsi_, ddpsi_, dddpsi_;
    BoundaryClass boundary_;
    ClosedForm closed_form_;
    double factor_ = 1.0;

    friend double psi_at(const FundamentalSolution&, double);
    friend double dpsi_at(const FundamentalSolution&, double);
    friend double ddpsi_at(const FundamentalSolution&, double);
};

FundamentalSolution solve_fundamental(const ModelSpec& m, BoundaryClass bc, const GridParams& params = {});

/// Cubic Hermite evaluation between nodes (closed form when tagged).
/// Throws Domain for x outside [x_min, x_max] without a closed form.
double psi_at(const FundamentalSolution& fs, double x);
double dpsi_at(const FundamentalSolution& fs, double x);
double ddpsi_at(const FundamentalSolution& fs, double x);

/// (A - r) psi at x from the interpolated derivatives.
double psi_residual_at(const ModelSpec& m, const FundamentalSolution& fs, double x);

/// lim psi(x)/psi'(x) as x -> 0+, by quadratic extrapolation over the three
/// smallest nodes (exact 0 when psi'(0) > 0 is tabulated at 0).
double psi_ratio_at_zero(const FundamentalSolution& fs);

/// psi(x)/psi'(x), falling back to psi_ratio_at_zero() for x <= x_min.
double psi_ratio(const FundamentalSolution& fs, double x);

/// Positive root of sigma^2/2 g (g - 1) + mu g - r = 0.
double gbm_exponent(double mu, double sigma, double r);

}  // namespace harvest
