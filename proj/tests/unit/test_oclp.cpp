#include "fixtures.hpp"
#include "harvest/oclp.hpp"
#include "harvest/psi.hpp"
#include "harvest/threshold.hpp"
#include "harvest/value.hpp"

#include <doctest.h>

#include <cmath>

using namespace harvest;

namespace {

struct Fixture {
    ModelSpec m = fixtures::drifted();
    FundamentalSolution fs = solve_fundamental(m, BoundaryClass::Regular);
    Threshold th = find_bstar(m, fs);
};

}  // namespace

TEST_CASE("cubic B-spline basis") {
    const TestFunctionBasis basis(4.0, 20);
    CHECK(basis.size() == 20);
    for (int i = 0; i <= 400; ++i) {
        const double x = 4.0 * i / 400.0;
        double sum = 0.0, d1 = 0.0;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            sum += basis.value(j, x);
            d1 += basis.d1(j, x);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(d1) <= 1e-10);
    }
    const double h = 1e-6;
    for (std::size_t j : {0u, 7u, 19u}) {
        const double x = basis.knot(j) + 1.3 * basis.spacing();
        CHECK(basis.d1(j, x) == doctest::Approx((basis.value(j, x + h) - basis.value(j, x - h)) / (2 * h)).epsilon(1e-6));
        CHECK(basis.d2(j, x) == doctest::Approx((basis.d1(j, x + h) - basis.d1(j, x - h)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("harvest operator") {
    const TestFunctionBasis basis(4.0, 20);
    for (std::size_t j = 0; j < basis.size(); ++j) {
        for (double x : {0.3, 1.7, 3.9}) {
            CHECK(harvest_operator_of(basis, j, x, 0.0) == -basis.d1(j, x));
            CHECK(harvest_operator_of(basis, j, x, 0.25) ==
                  doctest::Approx((basis.value(j, x - 0.25) - basis.value(j, x)) / 0.25).epsilon(1e-14));
        }
    }
}

TEST_CASE("full LP shape and right-hand side") {
    const Fixture f;
    const double x0 = 1.0;
    const MeasureGrid grid = make_measure_grid(f.m, x0, {f.th.bstar}, f.th.bstar);
    const TestFunctionBasis basis(grid.x_max(), 24);
    const LPInstance lp = build_full_lp(f.m, x0, grid, basis);
    CHECK(lp.rows() == basis.size() + 2);
    CHECK(lp.cols() == grid.n_columns());
    CHECK(grid.n_columns() == grid.n_tau() + grid.n_running() + grid.n_harvest());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        CHECK(lp.rhs[j] == doctest::Approx(basis.value(j, x0)).epsilon(1e-15));
        // compactly supported away from x0
        if (basis.knot(j) > x0 || basis.knot(j) + 4.0 * basis.spacing() < x0) CHECK(lp.rhs[j] == 0.0);
    }
    for (std::size_t a = 0; a < grid.n_harvest(); ++a) {
        const auto& at = grid.harvest_atoms()[a];
        CHECK(lp.objective[grid.harvest_col(a)] == doctest::Approx(yield_at(f.m, at.x)));
        if (at.z == 0.0) {
            for (std::size_t j = 0; j < basis.size(); j += 5) CHECK(lp.at(j, grid.harvest_col(a)) == -harvest_operator_of(basis, j, at.x, 0.0));
        }
    }

    FullLPOptions opt;
    opt.psi_row = &f.fs;
    CHECK(build_full_lp(f.m, x0, grid, basis, opt).rows() == basis.size() + 3);
}

TEST_CASE("full LP with zero objective has value zero") {
    const Fixture f;
    const MeasureGrid grid = make_measure_grid(f.m, 1.0, {f.th.bstar}, f.th.bstar, {40, 6});
    LPInstance lp = build_full_lp(f.m, 1.0, grid, TestFunctionBasis(grid.x_max(), 12));
    std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == 0.0);
}

TEST_CASE("auxiliary LP coefficients") {
    const Fixture f;
    const double x0 = f.th.bstar;
    const MeasureGrid grid = make_measure_grid(f.m, x0, {f.th.bstar}, f.th.bstar);
    const LPInstance lp = build_aux_lp(f.m, f.fs, x0, grid);
    CHECK(lp.rows() == 1);
    CHECK(lp.cols() == grid.n_harvest());
    CHECK(lp.rhs[0] == doctest::Approx(psi_at(f.fs, f.th.bstar)).epsilon(1e-15));
    for (std::size_t a = 0; a < grid.n_harvest(); ++a) {
        const auto& at = grid.harvest_atoms()[a];
        if (at.z == 0.0) {
            CHECK(lp.at(0, a) == doctest::Approx(dpsi_at(f.fs, at.x)).epsilon(1e-15));
            CHECK(lp.at(0, a) > 0.0);
        }
        if (at.z == at.x) CHECK(lp.at(0, a) == doctest::Approx(psi_at(f.fs, at.x) / at.x).epsilon(1e-13));
    }
}

TEST_CASE("auxiliary LP is exact below b*") {
    const Fixture f;
    for (double x0 : {0.3 * f.th.bstar, f.th.bstar}) {
        const MeasureGrid grid = make_measure_grid(f.m, x0, {f.th.bstar}, f.th.bstar);
        const LPSolution sol = solve_lp(build_aux_lp(f.m, f.fs, x0, grid));
        REQUIRE(sol.status == LPStatus::Optimal);
        const double target = yield_at(f.m, f.th.bstar) * psi_at(f.fs, x0) / dpsi_at(f.fs, f.th.bstar);
        CHECK(sol.objective == doctest::Approx(target).epsilon(1e-6));
        // reflection at b* and the smallest jump there tie to O(z_min^2) because psi''(b*) = 0
        const auto support = support_of(grid, sol, false);
        double at_b = 0.0, total = 0.0;
        for (const SupportAtom& a : support) {
            total += a.weight;
            if (std::abs(a.x - f.th.bstar) <= 1e-12 * f.th.bstar && a.z <= 1e-6 * a.x * (1 + 1e-9)) at_b += a.weight;
        }
        CHECK(at_b / total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("full LP bounds the value from above") {
    const ModelSpec m = fixtures::decreasing();
    const FundamentalSolution fs = solve_fundamental(m, BoundaryClass::Regular);
    const Threshold th = find_bstar(m, fs);
    const double x0 = 2.0 * th.bstar;
    const MeasureGrid grid = make_measure_grid(m, x0, {th.bstar}, th.bstar);
    FullLPOptions opt;
    opt.psi_row = &fs;
    const LPSolution full = solve_lp(build_full_lp(m, x0, grid, TestFunctionBasis(grid.x_max(), 40), opt));
    const LPSolution aux = solve_lp(build_aux_lp(m, fs, x0, grid));
    REQUIRE(full.status == LPStatus::Optimal);
    REQUIRE(aux.status == LPStatus::Optimal);
    const double v = value_at(m, fs, th, x0).total;
    CHECK(full.objective >= v - 1e-6);
    CHECK(full.objective <= aux.objective + 1e-6);
    CHECK(full.max_row_violation_rel <= 1e-9);
}

TEST_CASE("discretized mu1*") {
    const Fixture f;
    const Mu1StarReport atom = feasibility_check_mu1star(f.m, f.fs, f.th, f.th.bstar, 64);
    CHECK(atom.objective == doctest::Approx(yield_at(f.m, f.th.bstar) * psi_at(f.fs, f.th.bstar) / dpsi_at(f.fs, f.th.bstar)).epsilon(1e-12));
    CHECK(std::abs(atom.constraint_residual) <= 1e-12);

    const Mu1StarReport two = feasibility_check_mu1star(f.m, f.fs, f.th, 2.0, 1024);
    CHECK(two.objective == doctest::Approx(value_at(f.m, f.fs, f.th, 2.0).total).epsilon(1e-8));
    CHECK(two.value == doctest::Approx(value_at(f.m, f.fs, f.th, 2.0).total).epsilon(1e-15));

    double prev = std::abs(feasibility_check_mu1star(f.m, f.fs, f.th, 2.0, 64).constraint_residual);
    for (std::size_t n = 128; n <= 2048; n *= 2) {
        const double r = std::abs(feasibility_check_mu1star(f.m, f.fs, f.th, 2.0, n).constraint_residual);
        // second order: halving h cuts the residual by about 4
        CHECK(prev / r >= 3.9);
        prev = r;
    }
}

TEST_CASE("grid contains x0 and b* exactly") {
    const Fixture f;
    const MeasureGrid grid = make_measure_grid(f.m, 1.234, {f.th.bstar}, f.th.bstar);
    CHECK(grid.x0() == 1.234);
    CHECK(grid.find_state(f.th.bstar).has_value());
    CHECK(grid.tau_support().front() == 0.0);
    for (std::size_t i = 0; i < grid.states().size(); ++i) CHECK(grid.jumps(i).front() == 0.0);
}
