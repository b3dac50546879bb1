#include <benchmark/benchmark.h>

#include "levydrift/harness.hpp"

namespace ld = levydrift;

namespace {

ld::ExperimentConfig bench_config(std::size_t reps) {
    ld::ExperimentConfig cfg;
    cfg.model_name = "ou";
    cfg.theta_true = ld::ParamVector::Constant(2, 0.0);
    cfg.theta_true[0] = 2.0;
    cfg.levy = ld::CompoundPoisson{1.0, ld::ExponentialJumps{1.0}, ld::JumpSign::positive_only};
    cfg.t_n = 10.0;
    cfg.n = 2000;
    cfg.replications = reps;
    cfg.base_seed = 1;
    return cfg;
}

void BM_Serial(benchmark::State& state) {
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ld::run_experiment_serial(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OpenMP(benchmark::State& state) {
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ld::run_experiment(cfg, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
