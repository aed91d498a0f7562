#include <benchmark/benchmark.h>

#include "steerlab/entanglement.hpp"
#include "steerlab/nm_povm.hpp"
#include "steerlab/sampler.hpp"
#include "steerlab/steering.hpp"

using namespace steerlab;

namespace {

BipartiteState sampled_state(int da, int db, std::uint64_t seed) {
    SamplerConfig cfg;
    cfg.dim = da * db;
    cfg.seed = seed;
    return sample_states(cfg, da, db, 1).front();
}

void BM_HitAndRunStep(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    Rng rng(1);
    ChainState s = ChainState::center(dim);
    for (auto _ : state) {
        s = hit_and_run_step(s, rng);
        benchmark::DoNotOptimize(s.c.data());
    }
}
BENCHMARK(BM_HitAndRunStep)->Arg(4)->Arg(6)->Arg(9)->Arg(14);

void BM_TraceNorm(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    RMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(trace_norm(a));
}
BENCHMARK(BM_TraceNorm)->Arg(4)->Arg(9)->Arg(16);

void BM_LooCheck(benchmark::State& state) {
    const int db = static_cast<int>(state.range(0));
    const BipartiteState rho = sampled_state(2, db, 3);
    const LooBasis ga = gellmann_basis(2), gb = gellmann_basis(db);
    for (auto _ : state) benchmark::DoNotOptimize(loo_steering_check(rho, ga, gb).violated);
}
BENCHMARK(BM_LooCheck)->Arg(2)->Arg(3)->Arg(4);

void BM_RescaledOptimizer(benchmark::State& state) {
    const BipartiteState rho = sampled_state(2, 2, 4);
    const LooBasis g = gellmann_basis(2);
    RescaleOptions opts;
    opts.restarts = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(optimize_rescaled_steering(rho, g, g, opts).verdict.lhs);
}
BENCHMARK(BM_RescaledOptimizer)->Arg(3)->Arg(20);

void BM_RescaledDetects(benchmark::State& state) {
    const BipartiteState rho = sampled_state(2, 2, 5);
    const LooBasis g = gellmann_basis(2);
    RescaleOptions opts;
    opts.restarts = 3;
    for (auto _ : state) benchmark::DoNotOptimize(rescaled_steering_detects(rho, g, g, opts));
}
BENCHMARK(BM_RescaledDetects);

void BM_DasCheck(benchmark::State& state) {
    const int db = static_cast<int>(state.range(0));
    const BipartiteState rho = sampled_state(2, db, 6);
    for (auto _ : state) benchmark::DoNotOptimize(das_steering_check(rho).violated);
}
BENCHMARK(BM_DasCheck)->Arg(2)->Arg(4)->Arg(7);

void BM_ConstructPovm(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const PovmParams p = default_params(d, d + 1, d);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(construct_povm(p, {std::nullopt, seed++}).size());
}
BENCHMARK(BM_ConstructPovm)->Arg(2)->Arg(3)->Arg(4);

} // namespace
BENCHMARK_MAIN();
