#include "harvest/psi.hpp"
#include "harvest/threshold.hpp"

#include <benchmark/benchmark.h>

using namespace harvest;

namespace {

const ModelSpec kLogistic(Logistic{1.0, 1.0, 0.5}, 0.5, RationalYield{1.0, 0.5});

void BM_SolveFundamental(benchmark::State& state) {
    GridParams gp;
    gp.linear_nodes = static_cast<int>(state.range(0));
    const BoundaryClass bc = classify_boundary_zero(kLogistic);
    for (auto _ : state) benchmark::DoNotOptimize(solve_fundamental(kLogistic, bc, gp));
}
BENCHMARK(BM_SolveFundamental)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_FindBstar(benchmark::State& state) {
    const FundamentalSolution fs = solve_fundamental(kLogistic, classify_boundary_zero(kLogistic));
    for (auto _ : state) benchmark::DoNotOptimize(find_bstar(kLogistic, fs));
}
BENCHMARK(BM_FindBstar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
