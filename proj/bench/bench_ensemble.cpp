// Serial loop against OpenMP over paths. Both produce identical ledgers.

#include <benchmark/benchmark.h>

#include "lsns/config.hpp"
#include "lsns/ensemble.hpp"

namespace {

lsns::ExperimentConfig bench_config() {
    lsns::ExperimentConfig c;
    c.run.grid = lsns::Grid(16);
    c.run.dt = 1.0 / 64;
    c.run.T = 0.125;
    c.noise.amplitude = 0.3;
    c.diagnostics.test_functions = {lsns::TestFunctionSpec{"bump", 2, {0.2, 0.3, 0.1}, std::nullopt}};
    c.ensemble.paths = 8;
    return c;
}

void BM_ensemble(benchmark::State& state) {
    const auto config = bench_config();
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(lsns::run_ensemble(config, workers));
    state.SetItemsProcessed(state.iterations() * config.ensemble.paths);
}
BENCHMARK(BM_ensemble)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_single_path(benchmark::State& state) {
    const auto config = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(lsns::run_path(config, 0));
}
BENCHMARK(BM_single_path)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
