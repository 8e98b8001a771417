#pragma once

// Random generators for property-style tests. Deterministic per seed so
// failures replay.

#include <string>
#include <vector>

#include "bbo/rng.hpp"
#include "bbo/space.hpp"

namespace bbo::testgen {

inline ParamSpec random_spec(Rng& rng, const std::string& name) {
    switch (rng.uniform_below(4)) {
    case 0: {
        const bool log = rng.uniform() < 0.4;
        const double lo = log ? std::pow(10.0, rng.uniform(-6.0, 0.0))
                              : rng.uniform(-10.0, 5.0);
        const double hi = log ? lo * std::pow(10.0, rng.uniform(0.5, 5.0))
                              : lo + rng.uniform(0.5, 15.0);
        return ParamSpec::real(name, lo, hi, log ? Scale::Log : Scale::Linear);
    }
    case 1: {
        const bool log = rng.uniform() < 0.3;
        const std::int64_t lo =
            log ? 1 + static_cast<std::int64_t>(rng.uniform_below(5))
                : static_cast<std::int64_t>(rng.uniform(-20.0, 10.0));
        const std::int64_t hi = lo + 1 + static_cast<std::int64_t>(rng.uniform_below(100));
        return ParamSpec::integer(name, lo, hi, log ? Scale::Log : Scale::Linear);
    }
    case 2: {
        const std::size_t k = 2 + rng.uniform_below(5);
        std::vector<std::string> choices;
        for (std::size_t i = 0; i < k; ++i) {
            choices.push_back("choice" + std::to_string(i));
        }
        return ParamSpec::categorical(name, std::move(choices));
    }
    default:
        return ParamSpec::boolean(name);
    }
}

inline SearchSpace random_space(Rng& rng, std::size_t max_params = 6) {
    const std::size_t k = 1 + rng.uniform_below(max_params);
    std::vector<ParamSpec> specs;
    for (std::size_t i = 0; i < k; ++i) {
        specs.push_back(random_spec(rng, "p" + std::to_string(i)));
    }
    return SearchSpace(std::move(specs));
}

} // namespace bbo::testgen
