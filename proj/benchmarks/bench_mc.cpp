#include <benchmark/benchmark.h>

#include "ruin/fbp_dual.hpp"
#include "ruin/mc_sim.hpp"
#include "ruin/pde_primal.hpp"

using namespace ruin;

namespace {

SimConfig paths(benchmark::State& state) {
    SimConfig cfg;
    cfg.n_paths = static_cast<std::size_t>(state.range(0));
    return cfg;
}

}  // namespace

static void BM_SimulateRuin(benchmark::State& state) {
    const Model model(reference_params());
    const PolicyCurve policy = feedback_policy(solve_primal(model, 40.0, 4001, 1e-10), model);
    const SimConfig cfg = paths(state);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_ruin(model, 40.0, policy, 10.0, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateRuin)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_SimulateGame(benchmark::State& state) {
    const Model model(reference_params());
    const DualSolution sol = solve_dual(model, 40.0, 1e-10);
    const double y0 = 0.5 * (sol.boundary.y_M + sol.boundary.y_0);
    const SimConfig cfg = paths(state);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_game(model, 40.0, sol, y0, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateGame)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
