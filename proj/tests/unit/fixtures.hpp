#pragma once

#include "harvest/model.hpp"

#include <cmath>

namespace fixtures {

inline harvest::ModelSpec drifted(harvest::YieldFn f = harvest::ConstantYield{1.0}) {
    return harvest::ModelSpec(harvest::DriftedBM{1.0, std::sqrt(2.0)}, 1.0, f);
}

// strictly decreasing yield with an interior threshold (b* = 0 when sigma = sqrt 2)
inline harvest::ModelSpec decreasing() {
    return harvest::ModelSpec(harvest::DriftedBM{1.0, 1.0}, 1.0, harvest::ExponentialYield{1.0, 1.0});
}

inline harvest::ModelSpec gbm(harvest::YieldFn f = harvest::ConstantYield{1.0}) {
    return harvest::ModelSpec(harvest::GBM{0.05, 0.3}, 0.1, f);
}

inline harvest::ModelSpec logistic() {
    return harvest::ModelSpec(harvest::Logistic{1.0, 1.0, 0.5}, 0.5, harvest::RationalYield{1.0, 0.5});
}

// roots of lambda^2 + lambda - 1 = 0 for the drifted fixture
inline const double lambda_plus = (-1.0 + std::sqrt(5.0)) / 2.0;
inline const double lambda_minus = (-1.0 - std::sqrt(5.0)) / 2.0;

inline double psi_exact(double x) { return std::exp(lambda_plus * x) - std::exp(lambda_minus * x); }
inline double dpsi_exact(double x) {
    return lambda_plus * std::exp(lambda_plus * x) - lambda_minus * std::exp(lambda_minus * x);
}

// where psi'' vanishes, i.e. the maximizer of 1/psi'
inline const double bstar_exact = 2.0 * std::log(-lambda_minus / lambda_plus) / (lambda_plus - lambda_minus);

// positive root of 0.045 g^2 + 0.005 g - 0.1 = 0
inline const double gbm_gamma = (-0.005 + std::sqrt(0.005 * 0.005 + 4.0 * 0.045 * 0.1)) / (2.0 * 0.045);

}  // namespace fixtures
