#include <benchmark/benchmark.h>

#include "simineq/harness.hpp"
#include "simineq/models/entry_game.hpp"

using namespace simineq;

namespace {

void intersection_interval_bench(benchmark::State& state, MethodKind kind)
{
    std::size_t const J = state.range(0);
    std::size_t const R = state.range(1);
    IntersectionConfig cfg;
    cfg.J = J;
    cfg.n = 250;
    auto const data = gen_intersection_data(cfg, Stream(3));
    MethodSpec method;
    method.method = kind;
    method.B = 200;
    method.R2 = 20;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            intersection_interval(cfg, data, method, R, 0.05, Stream(4), Stream(5)));
}

void entry_gms(benchmark::State& state)
{
    EntryConfig const ec;
    std::size_t const n = state.range(0);
    auto const data = gen_entry_data(ec, n, Stream(6));
    auto const model = entry_moment_model(ec);
    auto const panel = simulate_panel(model, data, 5, Stream(7));
    std::vector<double> const theta(entry_theta_upper.begin(), entry_theta_upper.end());
    auto const spec = IndexSpec::make(IndexKind::qlr, model.moments);
    GmsBootstrap const gms{KappaRule::n_pow_1_16, 100, RootScale::original};
    for (auto _ : state)
        benchmark::DoNotOptimize(gms_bootstrap_cv(model, data, panel, theta, spec, gms, 0.05,
                                                  Stream(8), DegeneratePolicy::drop_zero));
}

}  // namespace

BENCHMARK_CAPTURE(intersection_interval_bench, gms, MethodKind::gms)
    ->Args({10, 1})
    ->Args({10, 20})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(intersection_interval_bench, smooth, MethodKind::smooth)
    ->Args({10, 1})
    ->Args({10, 20})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(entry_gms)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
