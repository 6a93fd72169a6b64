#include <benchmark/benchmark.h>

#include "simineq/qlr.hpp"
#include "simineq/random.hpp"
#include "simineq/smooth_index.hpp"

using namespace simineq;

namespace {

struct Problem
{
    Vector m;
    Matrix sigma;
};

Problem make_problem(std::size_t J)
{
    auto gen = Stream(11).generator();
    std::normal_distribution<double> z;
    Matrix a(J, J);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = z(gen);
    Problem p;
    p.sigma = a * a.transpose() / double(J) + Matrix::Identity(J, J);
    p.m.resize(J);
    for (auto& v : p.m)
        v = 0.3 * z(gen);
    return p;
}

void smooth_index(benchmark::State& state, IndexKind kind)
{
    auto const J = static_cast<std::size_t>(state.range(0));
    auto const p = make_problem(J);
    auto const spec = IndexSpec::make(kind, J);
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_S_mu(spec, p.m, p.sigma, 0.02));
}

void qlr_dual(benchmark::State& state)
{
    auto const J = static_cast<std::size_t>(state.range(0));
    auto const p = make_problem(J);
    std::size_t const limit = state.range(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_qlr_dual(p.m, p.sigma, 1.0, limit));
}

}  // namespace

BENCHMARK_CAPTURE(smooth_index, sum_plus, IndexKind::sum_plus)->Arg(5)->Arg(30);
BENCHMARK_CAPTURE(smooth_index, max_plus, IndexKind::max_plus)->Arg(5)->Arg(30);
BENCHMARK_CAPTURE(smooth_index, qlr, IndexKind::qlr)->Arg(5)->Arg(30);
BENCHMARK(qlr_dual)->Args({5, 12})->Args({5, 0})->Args({30, 0});
