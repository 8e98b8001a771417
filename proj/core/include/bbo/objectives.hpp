#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bbo/space.hpp"

namespace bbo {

/// Recorded in run manifests; bumped when any objective definition or
/// frozen noise constant changes, since that invalidates old baselines.
inline constexpr std::string_view kSuiteVersion = "1.0.0";

/// A synthetic objective: a deterministic surface plus a Gaussian noise
/// model that produces paired visible and holdout scores.
struct ObjectiveSpec {
    std::string id;
    SearchSpace space;
    std::function<double(const ParamVector&)> noiseless_fn;
    double f_star = 0.0;
    double sigma_cv = 0.0;
    double sigma_holdout = 0.0;
    std::size_t n_folds = 5;
};

struct EvalResult {
    double visible = 0.0;  // noiseless + mean of n_folds noise draws
    double holdout = 0.0;  // noiseless + one independently seeded draw
    double noiseless = 0.0; // logged for analysis, never shown to optimizers
};

/// Deterministic per (objective, point, trial_seed). The visible and
/// holdout noise streams are seeded independently from trial_seed, so the
/// two scores are uncorrelated given the point. A non-finite surface
/// value comes back as a non-finite result rather than an exception.
EvalResult evaluate(const ObjectiveSpec& obj, const ParamVector& p, std::uint64_t trial_seed);

double true_optimum(const ObjectiveSpec& obj);

/// The nine benchmark objectives, frozen ids and constants.
const std::vector<ObjectiveSpec>& suite();

/// Throws ConfigError for an id not in the suite.
const ObjectiveSpec& objective_by_id(const std::string& id);

} // namespace bbo
