#include "harvest/montecarlo.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace harvest;

namespace {

void BM_SimulateReflect(benchmark::State& state) {
    const ModelSpec m(DriftedBM{1.0, std::sqrt(2.0)}, 1.0, ConstantYield{1.0});
    SimConfig cfg;
    cfg.n_paths = static_cast<std::size_t>(state.range(0));
    cfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_payoff(m, ReflectAt{0.8608}, 0.8608, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateReflect)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
