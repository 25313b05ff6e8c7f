#pragma once

#include "harvest/model.hpp"
#include "harvest/threshold.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace harvest {

/// Local-time harvesting that keeps X <= b. A start above b is cut to b by a
/// single jump, which makes it equivalent to JumpThenReflect.
struct ReflectAt {
    double barrier = 0.0;
};

/// Z(t) = (x0 - b)^+ + L_b(t): one jump to b, then reflection.
struct JumpThenReflect {
    double barrier = 0.0;
};

/// n equal jumps from x0 down to b at time 0, then reflection.
struct Chatter {
    double barrier = 0.0;
    int n = 1;
};

/// Relaxed sweep: Lebesgue measure on [b, x0] harvested at time 0 with
/// infinitesimal jumps (payoff int_b^x0 f), then reflection at b.
struct RelaxedSweep {
    double barrier = 0.0;
};

using PolicySpec = std::variant<ReflectAt, JumpThenReflect, Chatter, RelaxedSweep>;

double barrier_of(const PolicySpec& p) noexcept;
std::string describe(const PolicySpec& p);

struct SimConfig {
    double dt = 1e-3;
    /// Simulation horizon; <= 0 selects T with exp(-r T) = 1e-4.
    double horizon = 0.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    /// Paths are absorbed once X <= extinction_floor.
    double extinction_floor = 0.0;
    /// Kill a step whose endpoints are both positive with the Brownian-bridge
    /// probability of having touched 0 in between.
    bool bridge_extinction = true;
    /// Worker threads; 0 uses std::thread::hardware_concurrency().
    unsigned threads = 0;
    bool keep_path_payoffs = false;
};

/// Horizon used for cfg (resolves the automatic choice).
double effective_horizon(const ModelSpec& m, const SimConfig& cfg);

/// Throws Config when cfg is unusable for model m.
void validate(const ModelSpec& m, const SimConfig& cfg);

struct SimResult {
    double mean = 0.0;
    /// Sample standard deviation / sqrt(n_paths).
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double extinct_fraction = 0.0;
    /// Deterministic time-0 harvest included in mean.
    double lump_term = 0.0;
    /// Upper bound on the discounted harvest after the horizon.
    double tail_bound = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    std::vector<double> path_payoffs;
};

struct StepResult {
    double x_next = 0.0;
    /// Overshoot pushed back to the barrier (discrete local time increment).
    double local_time = 0.0;
};

/// One projected Euler step of the process reflected below barrier b.
StepResult reflect_step(double x, double barrier, double dw, const ModelSpec& m, double dt);

/// Payoff of the policy's time-0 action from x0 (0 when x0 <= barrier).
double time0_lump(const ModelSpec& m, const PolicySpec& policy, double x0);

/// Lower Riemann sum sum_k f(x_k)(x_k - x_{k+1}) over n equal steps from x0 down to b.
double chatter_lump(const ModelSpec& m, double barrier, double x0, int n);

SimResult simulate_payoff(const ModelSpec& m, const PolicySpec& policy, double x0, const SimConfig& cfg);

struct PathPoint {
    double t = 0.0;
    double x = 0.0;
    double local_time = 0.0;
};

/// Replays path `path_index` of simulate_payoff step by step (same RNG stream).
std::vector<PathPoint> trace_path(const ModelSpec& m, const PolicySpec& policy, double x0, const SimConfig& cfg,
                                  std::size_t path_index);

struct ChatterRow {
    int n = 0;
    double lump = 0.0;
    double payoff = 0.0;
};

struct ChatterTable {
    std::vector<ChatterRow> rows;
    /// int_{b*}^{x0} f, the limit of the lumps.
    double sweep_lump = 0.0;
    /// Shared Monte Carlo estimate of reflecting at b* from b*.
    SimResult continuation;
};

/// Payoffs of Chatter(b*, n) for nested n; the lumps are analytic and the
/// reflection part is one common Monte Carlo estimate.
ChatterTable chatter_convergence(const ModelSpec& m, const Threshold& th, double x0, const SimConfig& cfg,
                                 const std::vector<int>& n_list);

}  // namespace harvest
