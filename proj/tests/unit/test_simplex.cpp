#include "harvest/simplex.hpp"

#include <doctest.h>

#include <cmath>

using namespace harvest;

namespace {

LPInstance make(std::size_t rows, std::size_t cols, std::initializer_list<double> a, std::initializer_list<double> b,
                std::initializer_list<double> c, std::initializer_list<RowSense> s) {
    LPInstance lp(rows, cols);
    lp.matrix.assign(a);
    lp.rhs.assign(b);
    lp.objective.assign(c);
    lp.senses.assign(s);
    return lp;
}

}  // namespace

TEST_CASE("textbook instance") {
    const LPInstance lp = make(1, 2, {1, 1}, {1}, {1, 0}, {RowSense::Equal});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("zero objective") {
    const LPInstance lp = make(2, 3, {1, 2, 0, 0, 1, 1}, {3, 2}, {0, 0, 0}, {RowSense::Equal, RowSense::LessEqual});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == 0.0);
    CHECK(sol.max_row_violation <= 1e-12);
}

TEST_CASE("mixed senses with a known vertex") {
    // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 9, x <= 3  ->  (3, 1), value 11
    const LPInstance lp = make(3, 2, {1, 1, 1, 3, 1, 0}, {4, 9, 3}, {3, 2},
                               {RowSense::LessEqual, RowSense::LessEqual, RowSense::LessEqual});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(11.0));
    CHECK(sol.x[0] == doctest::Approx(3.0));
    CHECK(sol.x[1] == doctest::Approx(1.0));
    CHECK(sol.rows[0].active);
    CHECK(sol.rows[2].active);
    CHECK_FALSE(sol.rows[1].active);
}

TEST_CASE("infeasible") {
    const LPInstance lp = make(2, 2, {1, 1, 1, 1}, {1, 2}, {1, 1}, {RowSense::Equal, RowSense::Equal});
    const LPSolution sol = solve_lp(lp);
    CHECK(sol.status == LPStatus::Infeasible);
    CHECK(sol.certificate.size() == 2);
}

TEST_CASE("unbounded with a ray") {
    const LPInstance lp = make(1, 2, {1, -1}, {1}, {0, 1}, {RowSense::Equal});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Unbounded);
    REQUIRE(sol.certificate.size() == 2);
    const double ad = sol.certificate[0] - sol.certificate[1];
    const double cd = sol.certificate[1];
    CHECK(std::abs(ad) <= 1e-12);
    CHECK(cd > 0.0);
    CHECK(sol.certificate[0] >= 0.0);
    CHECK(sol.certificate[1] >= 0.0);
}

TEST_CASE("redundant equality rows") {
    const LPInstance lp =
        make(3, 3, {1, 1, 1, 2, 2, 2, 1, 0, 0}, {1, 2, 0.25}, {0, 1, 2}, {RowSense::Equal, RowSense::Equal, RowSense::Equal});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.5));
}

TEST_CASE("Beale's cycling example terminates") {
    // cycles under the textbook largest-coefficient rule without anti-cycling
    const LPInstance lp = make(3, 4, {0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0}, {0, 0, 1}, {0.75, -150, 0.02, -6},
                               {RowSense::LessEqual, RowSense::LessEqual, RowSense::LessEqual});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.05));
    CHECK(sol.x[0] == doctest::Approx(0.04));
    CHECK(sol.x[2] == doctest::Approx(1.0));
}

TEST_CASE("badly scaled columns") {
    // same LP as the mixed-senses case with x measured in units of 1e-6
    const LPInstance lp = make(3, 2, {1e6, 1, 1e6, 3, 1e6, 0}, {4, 9, 3}, {3e6, 2},
                               {RowSense::LessEqual, RowSense::LessEqual, RowSense::LessEqual});
    const LPSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(11.0));
    CHECK(sol.x[0] == doctest::Approx(3e-6));
}

TEST_CASE("solutions are deterministic") {
    const LPInstance lp = make(3, 4, {0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0}, {0, 0, 1}, {0.75, -150, 0.02, -6},
                               {RowSense::LessEqual, RowSense::LessEqual, RowSense::LessEqual});
    const LPSolution a = solve_lp(lp), b = solve_lp(lp);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}
