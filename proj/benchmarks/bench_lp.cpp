#include "harvest/pipeline.hpp"

#include <benchmark/benchmark.h>

using namespace harvest;

namespace {

void BM_SolveFullLP(benchmark::State& state) {
    const ModelSpec m(DriftedBM{1.0, 1.0}, 1.0, ExponentialYield{1.0, 1.0});
    const SolvedModel sm = solve_model(m, GridParams{});
    LPConfig cfg;
    cfg.grid.n_states = static_cast<std::size_t>(state.range(0));
    cfg.basis_size = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_lp(m, sm, 2.0 * sm.threshold.bstar, LPMode::Full, cfg));
}
BENCHMARK(BM_SolveFullLP)->Args({60, 20})->Args({120, 40})->Args({240, 76})->Unit(benchmark::kMillisecond);

void BM_SolveAuxLP(benchmark::State& state) {
    const ModelSpec m(DriftedBM{1.0, 1.0}, 1.0, ExponentialYield{1.0, 1.0});
    const SolvedModel sm = solve_model(m, GridParams{});
    for (auto _ : state) benchmark::DoNotOptimize(run_lp(m, sm, sm.threshold.bstar, LPMode::Aux, LPConfig{}));
}
BENCHMARK(BM_SolveAuxLP)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
