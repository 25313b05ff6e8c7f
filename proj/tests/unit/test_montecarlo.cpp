#include "fixtures.hpp"
#include "harvest/error.hpp"
#include "harvest/montecarlo.hpp"

#include <doctest.h>

#include <cmath>

using namespace harvest;

namespace {

SimConfig small(std::uint64_t seed = 42) {
    SimConfig c;
    c.dt = 1e-2;
    c.n_paths = 400;
    c.seed = seed;
    c.threads = 1;
    return c;
}

}  // namespace

TEST_CASE("reflect step") {
    const ModelSpec m = fixtures::drifted();
    const double dt = 0.01, b = 1.0;
    // proposal x + mu dt + sigma dW lands 0.1 above the barrier
    const double dw = (0.1 - dt) / std::sqrt(2.0);
    const StepResult over = reflect_step(b, b, dw, m, dt);
    CHECK(over.x_next == b);
    CHECK(over.local_time == doctest::Approx(0.1).epsilon(1e-12));

    const StepResult under = reflect_step(0.5, b, -0.1, m, dt);
    CHECK(under.local_time == 0.0);
    CHECK(under.x_next == doctest::Approx(0.5 + dt - 0.1 * std::sqrt(2.0)));

    const ModelSpec still(DriftedBM{0.0, 1.0}, 1.0, ConstantYield{1.0});
    const StepResult idle = reflect_step(0.3, b, 0.0, still, dt);
    CHECK(idle.x_next == 0.3);
    CHECK(idle.local_time == 0.0);
}

TEST_CASE("time-zero lumps") {
    const ModelSpec c = fixtures::drifted();
    for (int n : {1, 2, 4, 8}) CHECK(chatter_lump(c, 0.5, 2.0, n) == doctest::Approx(1.5).epsilon(1e-14));

    const ModelSpec e = fixtures::drifted(ExponentialYield{1.0, 1.0});
    CHECK(chatter_lump(e, 0.0, 1.0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const double limit = 1.0 - std::exp(-1.0);
    double prev = 0.0;
    for (int n = 1; n <= 4096; n *= 2) {
        const double lump = chatter_lump(e, 0.0, 1.0, n);
        CHECK(lump >= prev);
        // lower Riemann sum of a decreasing function misses at most (f(0) - f(1)) / n
        CHECK(limit - lump <= (1.0 - std::exp(-1.0)) / n + 1e-15);
        CHECK(lump <= limit);
        prev = lump;
    }
    CHECK(time0_lump(e, JumpThenReflect{0.5}, 2.0) == doctest::Approx(std::exp(-2.0) * 1.5).epsilon(1e-14));
    CHECK(time0_lump(e, RelaxedSweep{0.5}, 2.0) == doctest::Approx(std::exp(-0.5) - std::exp(-2.0)).epsilon(1e-14));
    CHECK(time0_lump(e, ReflectAt{0.5}, 0.3) == 0.0);
}

TEST_CASE("one chatter step is a jump") {
    const ModelSpec m = fixtures::drifted(ExponentialYield{1.0, 1.0});
    const SimResult a = simulate_payoff(m, Chatter{0.4, 1}, 1.2, small());
    const SimResult b = simulate_payoff(m, JumpThenReflect{0.4}, 1.2, small());
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("fixed seed reproduces bit for bit across thread counts") {
    const ModelSpec m = fixtures::drifted();
    SimConfig one = small(7);
    SimConfig many = small(7);
    many.threads = 3;
    const SimResult a = simulate_payoff(m, ReflectAt{0.8}, 0.8, one);
    const SimResult b = simulate_payoff(m, ReflectAt{0.8}, 0.8, one);
    const SimResult c = simulate_payoff(m, ReflectAt{0.8}, 0.8, many);
    CHECK(a.mean == b.mean);
    CHECK(a.mean == c.mean);
    const SimResult d = simulate_payoff(m, ReflectAt{0.8}, 0.8, small(8));
    CHECK(a.mean != d.mean);
}

TEST_CASE("simulated paths respect the discrete Skorohod conditions") {
    const ModelSpec m = fixtures::logistic();
    const double b = 0.3;
    for (std::size_t path = 0; path < 20; ++path) {
        const auto pts = trace_path(m, ReflectAt{b}, b, small(3), path);
        REQUIRE_FALSE(pts.empty());
        for (const PathPoint& p : pts) {
            CHECK(p.x <= b);
            if (p.local_time > 0.0) CHECK(p.x == b);
        }
    }
}

TEST_CASE("relaxed sweep adds the analytic lump to reflection from b") {
    const ModelSpec m = fixtures::drifted(ExponentialYield{1.0, 1.0});
    const SimResult reflect = simulate_payoff(m, ReflectAt{0.4}, 0.4, small(11));
    const SimResult sweep = simulate_payoff(m, RelaxedSweep{0.4}, 1.4, small(11));
    CHECK(sweep.lump_term == doctest::Approx(std::exp(-0.4) - std::exp(-1.4)).epsilon(1e-14));
    CHECK(sweep.mean == doctest::Approx(reflect.mean + sweep.lump_term).epsilon(1e-12));
}

TEST_CASE("invalid simulation settings are config errors") {
    const ModelSpec m = fixtures::drifted();
    for (auto tweak : {+[](SimConfig& c) { c.dt = 0.0; }, +[](SimConfig& c) { c.n_paths = 0; }}) {
        SimConfig c = small();
        tweak(c);
        bool config = false;
        try {
            validate(m, c);
        } catch (const Error& e) {
            config = e.kind() == ErrorKind::Config;
        }
        CHECK(config);
    }
}

TEST_CASE("automatic horizon discounts to 1e-4") {
    const ModelSpec m = fixtures::drifted();
    CHECK(std::exp(-m.discount() * effective_horizon(m, SimConfig{})) == doctest::Approx(1e-4).epsilon(1e-9));
}
