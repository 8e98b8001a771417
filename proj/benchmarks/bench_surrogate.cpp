// Gaussian-process fitting and prediction costs across history sizes up
// to the full 128-evaluation budget. Fit is cubic in n and predict
// linear, so these curves say how much of the per-iteration budget the
// surrogate can eat.

#include <vector>

#include <benchmark/benchmark.h>

#include "bbo/rng.hpp"
#include "bbo/space.hpp"
#include "bbo/surrogate.hpp"

namespace {

using namespace bbo;

SearchSpace cube(std::size_t dim) {
    std::vector<ParamSpec> specs;
    for (std::size_t i = 0; i < dim; ++i) {
        specs.push_back(ParamSpec::real("x" + std::to_string(i), 0.0, 1.0));
    }
    return SearchSpace(std::move(specs));
}

struct History {
    std::vector<UnitVector> inputs;
    std::vector<double> targets;
};

History make_history(std::size_t n, std::size_t dim) {
    Rng rng(17);
    History h;
    h.inputs = sample_uniform_warped(cube(dim), n, rng);
    for (const auto& u : h.inputs) {
        double s = 0.0;
        for (double c : u.coords) {
            s += (c - 0.3) * (c - 0.3);
        }
        h.targets.push_back(s + 0.01 * rng.normal());
    }
    return h;
}

void BM_gp_fit(benchmark::State& state) {
    const auto h = make_history(std::size_t(state.range(0)), 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gp_fit(h.inputs, h.targets, GpConfig{}));
    }
}
BENCHMARK(BM_gp_fit)->Arg(16)->Arg(64)->Arg(128);

void BM_gp_fit_mle_grid(benchmark::State& state) {
    const auto h = make_history(std::size_t(state.range(0)), 6);
    GpConfig cfg;
    cfg.mle_grid = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gp_fit(h.inputs, h.targets, cfg));
    }
}
BENCHMARK(BM_gp_fit_mle_grid)->Arg(64)->Arg(128);

void BM_gp_predict(benchmark::State& state) {
    const auto h = make_history(std::size_t(state.range(0)), 6);
    const GpModel model = gp_fit(h.inputs, h.targets, GpConfig{});
    Rng rng(3);
    const UnitVector x = sample_uniform_warped(cube(6), 1, rng)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(gp_predict(model, x));
    }
}
BENCHMARK(BM_gp_predict)->Arg(16)->Arg(64)->Arg(128);

void BM_expected_improvement(benchmark::State& state) {
    double mu = -0.3;
    for (auto _ : state) {
        mu = -mu;
        benchmark::DoNotOptimize(expected_improvement(mu, 0.8, 0.1));
    }
}
BENCHMARK(BM_expected_improvement);

} // namespace
