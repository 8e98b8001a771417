// Steady-state suggest cost per optimizer on a full 128-evaluation
// history, the worst case the per-iteration budget has to absorb.

#include <memory>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "bbo/optimizer.hpp"
#include "bbo/space.hpp"

namespace {

using namespace bbo;

SearchSpace bench_space() {
    return SearchSpace({
        ParamSpec::real("lr", 1e-4, 1.0, Scale::Log),
        ParamSpec::real("momentum", 0.0, 0.99),
        ParamSpec::integer("depth", 1, 12),
        ParamSpec::categorical("act", {"relu", "tanh", "gelu"}),
        ParamSpec::boolean("bias"),
    });
}

double synthetic_score(const SearchSpace& space, const ParamVector& p) {
    double s = 0.0;
    for (double c : warp(space, p).coords) {
        s += (c - 0.3) * (c - 0.3);
    }
    return s;
}

void feed_full_history(Optimizer& opt, const SearchSpace& space) {
    for (std::size_t iter = 0; iter < 16; ++iter) {
        const auto batch = opt.suggest(8);
        std::vector<double> scores;
        for (const auto& p : batch) {
            scores.push_back(synthetic_score(space, p));
        }
        opt.observe(batch, scores);
    }
}

void BM_suggest_full_history(benchmark::State& state, const std::string& name) {
    const SearchSpace space = bench_space();
    auto opt = make_optimizer({name, {}, 42}, space);
    feed_full_history(*opt, space);
    for (auto _ : state) {
        benchmark::DoNotOptimize(opt->suggest(8));
    }
}

const char* kBenchNames[] = {
    "random", "anneal", "de", "tpe", "gpei", "turbo", "turbo+gpei", "tpe+de",
};

[[maybe_unused]] const bool registered = [] {
    for (const char* name : kBenchNames) {
        benchmark::RegisterBenchmark(("BM_suggest_full_history/" + std::string(name)).c_str(),
                                     BM_suggest_full_history, std::string(name));
    }
    return true;
}();

} // namespace
