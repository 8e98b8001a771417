#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bbo/space.hpp"

namespace bbo {

/// One evaluated point: parameters plus the visible score reported for them.
struct Observation {
    ParamVector params;
    double score = 0.0;
};

/// Append-only evaluation log with running-minimum tracking. Non-finite
/// scores are stored but never become the best and never enter model fits.
class ObservationHistory {
public:
    void append(const ParamVector& params, double score);

    const std::vector<Observation>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t finite_count() const noexcept { return finite_count_; }

    bool has_best() const noexcept { return best_index_ >= 0; }

    /// Throws StateError when no finite score has been observed.
    double best_score() const;
    const ParamVector& best_params() const;

    /// Finite records only, in insertion order.
    std::vector<Observation> finite_records() const;

private:
    std::vector<Observation> records_;
    std::ptrdiff_t best_index_ = -1;
    std::size_t finite_count_ = 0;
};

/// Named optimizer selection: registry name (singles or "a+b" ensembles),
/// numeric hyperparameter overrides, and the instance seed.
struct OptimizerSpec {
    std::string name;
    std::map<std::string, double> hyperparams;
    std::uint64_t seed = 0;
};

/// Batch suggest/observe interface every optimizer implements.
///
/// Instances are externally synchronized: suggest and observe are never
/// called concurrently on one instance. Distinct instances are independent.
class Optimizer {
public:
    virtual ~Optimizer() = default;

    /// Exactly n in-domain points. Deterministic given the construction
    /// seed and the preceding suggest/observe call sequence.
    virtual std::vector<ParamVector> suggest(std::size_t n) = 0;

    /// Appends every pair to the history, foreign points included, and
    /// marks any internal model stale. Throws ShapeError on length
    /// mismatch and DomainError if a point does not fit the space.
    void observe(const std::vector<ParamVector>& params, const std::vector<double>& scores);

    const std::string& name() const noexcept { return name_; }
    const SearchSpace& space() const noexcept { return space_; }
    const ObservationHistory& history() const noexcept { return history_; }

protected:
    Optimizer(std::string name, SearchSpace space);

    /// Called after a batch lands in the history.
    virtual void on_observe(const std::vector<ParamVector>& params,
                            const std::vector<double>& scores);

    ObservationHistory history_;

private:
    std::string name_;
    SearchSpace space_;
};

/// Names constructible by make_optimizer, ensembles aside.
const std::vector<std::string>& base_optimizer_names();

/// Builds a registered optimizer. Ensemble names are '+'-joined base names;
/// each constituent i is seeded with seed_mix(spec.seed, i) and takes
/// default hyperparameters. Unknown names and invalid or unknown
/// hyperparameters throw ConfigError.
std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, const SearchSpace& space);

/// Shared warm-up length: min(2 * warped_dim, 8).
std::size_t default_init_points(const SearchSpace& space);

} // namespace bbo
