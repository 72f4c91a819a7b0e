// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "reflectmc/normal.hpp"
#include "reflectmc/paths.hpp"
#include "reflectmc/reflection.hpp"
#include "reflectmc/rng.hpp"
#include "reflectmc/stopping.hpp"
#include "reflectmc/verify.hpp"

namespace {

using namespace reflectmc;

void BM_PhiloxUniform(benchmark::State& state) {
    RandomStream stream(StreamSpec{1, 0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(stream.uniform());
        if (stream.position() > (1ull << 31)) stream.seek(0);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxUniform);

void BM_NormalQuantile(benchmark::State& state) {
    double p = 0.0;
    for (auto _ : state) {
        p += 0.6180339887498949;
        if (p >= 1.0) p -= 1.0;
        benchmark::DoNotOptimize(normal_quantile(p));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalQuantile);

void BM_GeneratePath(benchmark::State& state) {
    auto grid = share(uniform_grid(1.0, static_cast<std::size_t>(state.range(0))));
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_path(grid, StreamSpec{2, i++}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePath)->Arg(64)->Arg(1024);

void BM_EvaluateAndReflect(benchmark::State& state) {
    auto grid = share(uniform_grid(1.0, 1024));
    const SamplePath path = generate_path(grid, StreamSpec{3, 0});
    const StoppingRule rule = first_hitting_rule(0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reflect(path, evaluate_rule(rule, path)));
    }
}
BENCHMARK(BM_EvaluateAndReflect);

void BM_ReflectionCharTest(benchmark::State& state) {
    auto grid = share(uniform_grid(1.0, 256));
    const LinearFunctionalSpec spec({0.25, 0.5, 1.0}, {1.0, -1.0, 1.0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(reflection_char_test(grid, first_hitting_rule(0.3), spec, 10000, 4));
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ReflectionCharTest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
