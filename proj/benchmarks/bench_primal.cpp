#include <benchmark/benchmark.h>

#include "ruin/pde_primal.hpp"

using namespace ruin;

static void BM_SolvePrimal(benchmark::State& state) {
    const Model model(reference_params());
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_primal(model, 40.0, n, 1e-10));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolvePrimal)->RangeMultiplier(2)->Range(1001, 16001)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_Residual(benchmark::State& state) {
    const Model model(reference_params());
    const ValueCurve f = solve_primal(model, 40.0, 4001, 1e-10);
    for (auto _ : state) benchmark::DoNotOptimize(hjb_residual(f, model));
}
BENCHMARK(BM_Residual);

static void BM_ConvergenceLadder(benchmark::State& state) {
    const Model model(reference_params());
    for (auto _ : state) benchmark::DoNotOptimize(convergence_ladder(model, 3));
}
BENCHMARK(BM_ConvergenceLadder)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
