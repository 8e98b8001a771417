// Round-trip and sampling costs for the warped-space layer. These sit on
// every optimizer's hot path, so a regression here taxes the whole suite.

#include <benchmark/benchmark.h>

#include "bbo/objectives.hpp"
#include "bbo/rng.hpp"
#include "bbo/space.hpp"

namespace {

using namespace bbo;

SearchSpace mixed_space() {
    return SearchSpace({
        ParamSpec::real("lr", 1e-4, 1.0, Scale::Log),
        ParamSpec::real("momentum", 0.0, 0.99),
        ParamSpec::integer("depth", 1, 12),
        ParamSpec::integer("width", 16, 1024, Scale::Log),
        ParamSpec::categorical("act", {"relu", "tanh", "gelu", "swish"}),
        ParamSpec::boolean("bias"),
    });
}

void BM_warp(benchmark::State& state) {
    const SearchSpace space = mixed_space();
    const ParamVector p = sample_uniform(space, 1, 7)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(warp(space, p));
    }
}
BENCHMARK(BM_warp);

void BM_unwarp(benchmark::State& state) {
    const SearchSpace space = mixed_space();
    Rng rng(7);
    const UnitVector u = sample_uniform_warped(space, 1, rng)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(unwarp(space, u));
    }
}
BENCHMARK(BM_unwarp);

void BM_sample_uniform(benchmark::State& state) {
    const SearchSpace space = mixed_space();
    const std::size_t n = std::size_t(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_uniform(space, n, ++seed));
    }
}
BENCHMARK(BM_sample_uniform)->Arg(8)->Arg(128);

void BM_latin_hypercube(benchmark::State& state) {
    const SearchSpace space = mixed_space();
    const std::size_t n = std::size_t(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(latin_hypercube(space, n, ++seed));
    }
}
BENCHMARK(BM_latin_hypercube)->Arg(8)->Arg(128);

void BM_evaluate_objective(benchmark::State& state) {
    const auto& obj = suite()[std::size_t(state.range(0))];
    const ParamVector p = sample_uniform(obj.space, 1, 7)[0];
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(obj, p, ++seed));
    }
    state.SetLabel(obj.id);
}
BENCHMARK(BM_evaluate_objective)->DenseRange(0, 8);

} // namespace

BENCHMARK_MAIN();
