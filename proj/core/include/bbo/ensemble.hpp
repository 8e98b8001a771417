#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bbo/optimizer.hpp"

namespace bbo {

/// Batch quota per constituent: everyone gets floor(n_batch / k), and the
/// n_batch mod k leftover slots go to indices (iter_id + j) mod k, so the
/// remainder rotates and quotas even out over any k consecutive
/// iterations.
std::vector<std::size_t> split_batch(std::size_t k, std::size_t n_batch, std::size_t iter_id);

/// Seed handed to constituent `index` of an ensemble built from `seed`.
std::uint64_t ensemble_constituent_seed(std::uint64_t seed, std::size_t index);

/// Combinator over k >= 2 optimizers sharing one space: suggest splits
/// the batch across constituents (concatenated in constituent order) and
/// observe broadcasts every pair to all of them, so constituent histories
/// stay identical. Itself an optimizer, so ensembles enter the registry
/// and the harness like any single.
class EnsembleOptimizer : public Optimizer {
public:
    /// Throws ConfigError on fewer than two constituents or a nested
    /// ensemble, and ShapeError if a constituent disagrees on the space.
    EnsembleOptimizer(const SearchSpace& space,
                      std::vector<std::unique_ptr<Optimizer>> constituents);

    std::vector<ParamVector> suggest(std::size_t n) override;

    std::size_t constituent_count() const noexcept { return constituents_.size(); }
    const Optimizer& constituent(std::size_t i) const { return *constituents_.at(i); }
    std::size_t iter_counter() const noexcept { return iter_counter_; }

private:
    void on_observe(const std::vector<ParamVector>& params,
                    const std::vector<double>& scores) override;

    std::vector<std::unique_ptr<Optimizer>> constituents_;
    std::size_t iter_counter_ = 0;
};

} // namespace bbo
