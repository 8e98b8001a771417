#include "bbo/ensemble.hpp"

#include <utility>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"

namespace bbo {

std::vector<std::size_t> split_batch(std::size_t k, std::size_t n_batch, std::size_t iter_id) {
    if (k < 1) {
        throw DomainError("split_batch: k must be >= 1");
    }
    std::vector<std::size_t> sizes(k, n_batch / k);
    const std::size_t remainder = n_batch % k;
    for (std::size_t j = 0; j < remainder; ++j) {
        sizes[(iter_id + j) % k] += 1;
    }
    return sizes;
}

std::uint64_t ensemble_constituent_seed(std::uint64_t seed, std::size_t index) {
    return seed_mix(seed, static_cast<std::uint64_t>(index));
}

namespace {

std::string joined_name(const std::vector<std::unique_ptr<Optimizer>>& constituents) {
    std::string name;
    for (const auto& c : constituents) {
        if (!name.empty()) {
            name += '+';
        }
        name += c ? c->name() : "?";
    }
    return name;
}

} // namespace

EnsembleOptimizer::EnsembleOptimizer(const SearchSpace& space,
                                     std::vector<std::unique_ptr<Optimizer>> constituents)
    : Optimizer(joined_name(constituents), space), constituents_(std::move(constituents)) {
    if (constituents_.size() < 2) {
        throw ConfigError("ensemble needs at least 2 constituents, got " +
                          std::to_string(constituents_.size()));
    }
    for (std::size_t i = 0; i < constituents_.size(); ++i) {
        if (!constituents_[i]) {
            throw ConfigError("ensemble constituent " + std::to_string(i) + " is null");
        }
        if (dynamic_cast<EnsembleOptimizer*>(constituents_[i].get()) != nullptr) {
            throw ConfigError("ensemble constituent '" + constituents_[i]->name() +
                              "' is itself an ensemble; nesting is not supported");
        }
        if (!(constituents_[i]->space() == space)) {
            throw ShapeError("ensemble constituent '" + constituents_[i]->name() +
                             "' was built for a different space");
        }
    }
}

std::vector<ParamVector> EnsembleOptimizer::suggest(std::size_t n) {
    const auto sizes = split_batch(constituents_.size(), n, iter_counter_);
    iter_counter_ += 1;
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < constituents_.size(); ++i) {
        auto part = constituents_[i]->suggest(sizes[i]);
        if (part.size() != sizes[i]) {
            throw ContractViolation("ensemble constituent " + std::to_string(i) + " ('" +
                                    constituents_[i]->name() + "') returned " +
                                    std::to_string(part.size()) + " suggestions, wanted " +
                                    std::to_string(sizes[i]));
        }
        for (auto& p : part) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

void EnsembleOptimizer::on_observe(const std::vector<ParamVector>& params,
                                   const std::vector<double>& scores) {
    // Full broadcast: constituents see foreign suggestions too.
    for (auto& c : constituents_) {
        c->observe(params, scores);
    }
}

} // namespace bbo
