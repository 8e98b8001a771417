#pragma once

#include <cstddef>
#include <vector>

#include "bbo/space.hpp"

namespace bbo {

/// Gaussian-process settings. The kernel is Matern-5/2 with a single
/// isotropic lengthscale. lengthscale <= 0 selects the median-pairwise-
/// distance heuristic at fit time; mle_grid additionally scans
/// {0.25, 0.5, 1, 2, 4} x the heuristic by log marginal likelihood.
struct GpConfig {
    double lengthscale = 0.0;
    double signal_variance = 1.0;
    double noise_jitter = 1e-6;
    bool standardize_targets = true;
    bool mle_grid = false;
};

/// An immutable fitted GP. Factor and weights are stored dense,
/// row-major; histories here are at most a few hundred points.
struct GpModel {
    std::vector<UnitVector> inputs;
    std::vector<double> targets_std;
    std::vector<double> chol;  // lower-triangular factor of K + jitter*I
    std::vector<double> alpha; // (K + jitter*I)^-1 targets_std
    double target_mean = 0.0;
    double target_std = 1.0;
    double lengthscale = 1.0;
    double signal_variance = 1.0;
    double jitter = 1e-6;

    std::size_t size() const noexcept { return inputs.size(); }
    std::size_t dim() const noexcept {
        return inputs.empty() ? 0 : inputs.front().coords.size();
    }
};

/// Matern-5/2 correlation at distance r for lengthscale ell.
double matern52(double r, double ell);

GpModel gp_fit(const std::vector<UnitVector>& inputs, const std::vector<double>& targets,
               const GpConfig& cfg = {});

struct GpPrediction {
    double mu;
    double sigma; // >= 0
};

GpPrediction gp_predict(const GpModel& model, const UnitVector& x);

/// Expected improvement under the minimization convention: how much a
/// N(mu, sigma^2) draw is expected to improve on f_best.
double expected_improvement(double mu, double sigma, double f_best);

} // namespace bbo
