#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bbo/objectives.hpp"
#include "bbo/space.hpp"

namespace bbo {

struct Budget {
    std::size_t n_step = 16;
    std::size_t n_batch = 8;

    std::size_t evaluations() const noexcept { return n_step * n_batch; }
};

/// Random-search reference for one (objective, budget): rand_opt anchors
/// normalized 0 (the best visible score in a large uniform pool) and
/// rand_mean anchors 1 (expected final cumulative-min of a budget-matched
/// random run). Simulated runs draw from the pool without replacement,
/// which keeps rand_mean >= rand_opt by construction.
struct Baseline {
    std::string objective_id;
    std::size_t n_step = 0;
    std::size_t n_batch = 0;
    double rand_opt = 0.0;
    double rand_mean = 0.0;
    std::size_t pool_size = 0;
    std::size_t n_sim_runs = 0;
    std::uint64_t seed = 0;
    ParamVector best_pool_params;         // argmin of the pool
    std::vector<double> sim_final_minima; // one final cumulative-min per run
};

/// Deterministic per seed. Throws DegenerateBaselineError when the pool
/// statistics are too flat to normalize against.
Baseline build_baseline(const ObjectiveSpec& obj, Budget budget, std::size_t pool_size,
                        std::size_t n_sim_runs, std::uint64_t seed);

/// (perf - rand_opt) / (rand_mean - rand_opt), clipped to [-1, 1].
/// Non-finite perf maps to +1, the post-clip ceiling.
double normalize(double perf, const Baseline& b);

/// Running minimum; non-finite entries carry the previous value, and a
/// non-finite head yields +inf until the first finite entry.
std::vector<double> cumulative_min(const std::vector<double>& series);

/// One optimizer run on one objective: per-iteration cumulative-min
/// curves, their normalized finals, and per-iteration timings.
struct StudyReport {
    std::string optimizer_name;
    std::string objective_id;
    std::size_t repeat_idx = 0;
    std::vector<double> visible_curve;
    std::vector<double> holdout_curve;
    double norm_visible = 0.0;
    double norm_holdout = 0.0;
    std::vector<double> suggest_seconds;
    std::vector<double> observe_seconds;
    std::vector<double> evaluate_seconds;
};

enum class ScoreKind { Visible, Holdout };

/// Mean normalized scores with labels sorted, so report order never
/// matters. matrix[i][j] is optimizer i's mean over repeats on objective
/// j; best_per_objective[j] is the row index of the lowest mean.
struct AggregateResult {
    std::vector<std::string> optimizers;
    std::vector<std::string> objectives;
    std::vector<std::vector<double>> matrix;
    std::vector<double> mean_norm;
    std::vector<std::size_t> best_per_objective;
    std::size_t n_repeats = 0;
};

/// Throws IncompleteGridError listing every missing
/// (optimizer, objective, repeat) cell; repeats run 0..max observed.
AggregateResult aggregate(const std::vector<StudyReport>& reports, ScoreKind which);

/// 100 * (1 - mean_norm), clipped to [0, 100].
double leaderboard_score(double mean_norm);

std::string baseline_to_json(const Baseline& b);
Baseline baseline_from_json(const SearchSpace& space, const std::string& text);

} // namespace bbo
