#include <benchmark/benchmark.h>

#include "ruin/duality.hpp"
#include "ruin/fbp_dual.hpp"
#include "ruin/pde_primal.hpp"

using namespace ruin;

static void BM_SolveDual(benchmark::State& state) {
    const Model model(reference_params());
    for (auto _ : state) benchmark::DoNotOptimize(solve_dual(model, static_cast<double>(state.range(0)), 1e-10));
}
BENCHMARK(BM_SolveDual)->Arg(30)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

static void BM_ShootOnce(benchmark::State& state) {
    const Model model(reference_params());
    for (auto _ : state) benchmark::DoNotOptimize(shoot_dual(model, 40.0, 0.01));
}
BENCHMARK(BM_ShootOnce)->Unit(benchmark::kMicrosecond);

static void BM_BiconjugateCheck(benchmark::State& state) {
    const Model model(reference_params());
    const DualSolution g = solve_dual(model, 40.0, 1e-10);
    const ValueCurve f = solve_primal(model, 40.0, 4001, 1e-10);
    for (auto _ : state) benchmark::DoNotOptimize(biconjugate_check(g, f));
}
BENCHMARK(BM_BiconjugateCheck)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
