#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bbo/optimizer.hpp"
#include "bbo/rng.hpp"
#include "bbo/space.hpp"
#include "bbo/surrogate.hpp"

namespace bbo {

// ---------------------------------------------------------------- random

/// Uniform independent sampling; the only optimizer with no warm-up phase.
class RandomOptimizer : public Optimizer {
public:
    RandomOptimizer(const SearchSpace& space, std::uint64_t seed);
    std::vector<ParamVector> suggest(std::size_t n) override;

private:
    Rng rng_;
};

// ------------------------------------------------------------------- tpe

struct TpeConfig {
    double gamma = 0.25;
    std::size_t n_candidates = 24;
    std::size_t init_points = 0; // 0: default_init_points(space)
};

/// Splits finite records into the ceil(gamma * n) lowest scores (at least
/// one) and the rest. Both halves come back ordered by score, insertion
/// index breaking ties. Throws StateError when no record is finite.
std::pair<std::vector<Observation>, std::vector<Observation>>
tpe_split(const std::vector<Observation>& records, double gamma);

std::pair<std::vector<Observation>, std::vector<Observation>>
tpe_split(const ObservationHistory& history, double gamma);

/// Draws n_candidates points from a per-parameter density fitted to good
/// (Gaussian kernels in warped space, Scott's-rule bandwidth clamped to
/// [1e-3, 1]; add-one-smoothed frequencies on categoricals) and returns
/// the one maximizing density_good / density_bad, the bad density floored
/// at 1e-12. Throws StateError when good is empty.
ParamVector tpe_propose(const SearchSpace& space, const std::vector<Observation>& good,
                        const std::vector<Observation>& bad, std::size_t n_candidates,
                        Rng& rng);

class TpeOptimizer : public Optimizer {
public:
    TpeOptimizer(const SearchSpace& space, std::uint64_t seed, TpeConfig cfg = {});
    std::vector<ParamVector> suggest(std::size_t n) override;

private:
    TpeConfig cfg_;
    std::size_t init_points_;
    Rng rng_;
};

// ------------------------------------------------------------------ gpei

struct GpEiConfig {
    std::size_t n_candidates = 512;
    bool mle_grid = false;
    std::size_t init_points = 0;
};

/// One acquisition decision, kept so tests can re-derive the winner from
/// the logged posterior.
struct CandidatePick {
    std::vector<UnitVector> candidates;
    std::vector<double> mu;
    std::vector<double> sigma;
    double f_best = 0.0;
    std::size_t chosen = 0;
};

/// GP posterior + expected improvement over a latin-hypercube candidate
/// set, batches filled with the constant-liar rule (pending points scored
/// at the current best).
class GpEiOptimizer : public Optimizer {
public:
    GpEiOptimizer(const SearchSpace& space, std::uint64_t seed, GpEiConfig cfg = {});
    std::vector<ParamVector> suggest(std::size_t n) override;

    /// Picks from the most recent model-based suggest call.
    const std::vector<CandidatePick>& last_picks() const noexcept { return picks_; }

private:
    GpEiConfig cfg_;
    std::size_t init_points_;
    Rng rng_;
    std::vector<CandidatePick> picks_;
};

// ----------------------------------------------------------------- turbo

struct TrustRegionConfig {
    double l_init = 0.8;
    double l_min = 0.015625; // 2^-6
    double l_max = 1.6;
    int tau_succ = 3;
    int tau_fail = 3;
};

struct TrustRegionState {
    double length = 0.8;
    int success_streak = 0;
    int failure_streak = 0;
    UnitVector center;
    int restart_count = 0;
};

/// Streak bookkeeping for one observed batch. A batch beating the
/// incumbent extends the success streak, anything else the failure
/// streak; tau_succ successes double length (capped at l_max), tau_fail
/// failures halve it, and falling below l_min restarts: length back to
/// l_init, center re-seeded from rng, restart_count incremented.
TrustRegionState trust_region_update(TrustRegionState st, double batch_best, double incumbent,
                                     const TrustRegionConfig& cfg, const SearchSpace& space,
                                     Rng& rng);

struct TurboConfig {
    TrustRegionConfig trust;
    std::size_t n_candidates = 512;
    bool mle_grid = false;
    std::size_t init_points = 0;
};

/// GP-EI restricted to a box [center +- length/2] around the incumbent,
/// box and fit window both reset on restart.
class TurboOptimizer : public Optimizer {
public:
    TurboOptimizer(const SearchSpace& space, std::uint64_t seed, TurboConfig cfg = {});
    std::vector<ParamVector> suggest(std::size_t n) override;

    const TrustRegionState& state() const noexcept { return state_; }
    const std::vector<CandidatePick>& last_picks() const noexcept { return picks_; }

private:
    void on_observe(const std::vector<ParamVector>& params,
                    const std::vector<double>& scores) override;

    std::vector<Observation> epoch_records() const;

    TurboConfig cfg_;
    std::size_t init_points_;
    Rng rng_;
    TrustRegionState state_;
    bool box_live_ = false;      // center meaningful once warm-up has data
    std::size_t epoch_start_ = 0; // history index of the first post-restart record
    std::optional<Observation> epoch_best_;
    std::vector<CandidatePick> picks_;
};

// -------------------------------------------------------------------- de

struct DeConfig {
    double f = 0.8;
    double cr = 0.9;
    std::size_t pop_size = 8;
    std::size_t init_points = 0;
};

/// rand/1/bin in warped space: mutant = a + f * (b - c) clamped to [0, 1],
/// crossed binomially against a fourth distinct member with at least one
/// mutated coordinate. Throws StateError when the population is under 4.
std::vector<ParamVector> de_step(const SearchSpace& space,
                                 const std::vector<Observation>& population, double f,
                                 double cr, std::size_t n, Rng& rng);

class DeOptimizer : public Optimizer {
public:
    DeOptimizer(const SearchSpace& space, std::uint64_t seed, DeConfig cfg = {});
    std::vector<ParamVector> suggest(std::size_t n) override;

private:
    DeConfig cfg_;
    std::size_t init_points_;
    Rng rng_;
};

// ---------------------------------------------------------------- anneal

struct AnnealConfig {
    double t0 = 0.25;
    double alpha = 0.85;
    std::size_t init_points = 0;
};

/// Gaussian perturbation of the incumbent with per-coordinate stddev
/// t0 * alpha^iter_id, clamped to [0, 1]; categorical parameters are
/// resampled uniformly with that same schedule value as probability.
ParamVector anneal_propose(const SearchSpace& space, const ParamVector& incumbent,
                           std::size_t iter_id, const AnnealConfig& cfg, Rng& rng);

class AnnealOptimizer : public Optimizer {
public:
    AnnealOptimizer(const SearchSpace& space, std::uint64_t seed, AnnealConfig cfg = {});
    std::vector<ParamVector> suggest(std::size_t n) override;

private:
    AnnealConfig cfg_;
    std::size_t init_points_;
    Rng rng_;
    std::size_t iter_id_ = 0;
};

} // namespace bbo
