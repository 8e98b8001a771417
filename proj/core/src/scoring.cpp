#include "bbo/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>

#include <nlohmann/json.hpp>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"

namespace bbo {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double require_non_degenerate(const Baseline& b, const char* who) {
    const double span = b.rand_mean - b.rand_opt;
    if (!std::isfinite(span) || span <= 1e-12) {
        throw DegenerateBaselineError(std::string(who) + ": baseline for '" +
                                      b.objective_id +
                                      "' is degenerate (rand_mean " +
                                      std::to_string(b.rand_mean) + ", rand_opt " +
                                      std::to_string(b.rand_opt) + ")");
    }
    return span;
}

} // namespace

Baseline build_baseline(const ObjectiveSpec& obj, Budget budget, std::size_t pool_size,
                        std::size_t n_sim_runs, std::uint64_t seed) {
    if (budget.evaluations() == 0) {
        throw ConfigError("build_baseline: budget must cover at least one evaluation");
    }
    if (pool_size == 0 || n_sim_runs == 0) {
        throw ConfigError("build_baseline: pool_size and n_sim_runs must be positive");
    }

    const auto pool = sample_uniform(obj.space, pool_size, seed_mix(seed, "pool"));
    std::vector<double> visible(pool_size);
    double rand_opt = kInf;
    std::size_t best_idx = pool_size;
    for (std::size_t i = 0; i < pool_size; ++i) {
        visible[i] = evaluate(obj, pool[i], seed_mix(seed, "pool-trial", i)).visible;
        if (std::isfinite(visible[i]) && visible[i] < rand_opt) {
            rand_opt = visible[i];
            best_idx = i;
        }
    }
    if (best_idx == pool_size) {
        throw DegenerateBaselineError("build_baseline: objective '" + obj.id +
                                      "' produced no finite visible score over a pool of " +
                                      std::to_string(pool_size));
    }

    // Each simulated run is random search drawing from the same pool without
    // replacement, so every run's final minimum is at least rand_opt.
    const std::size_t draws = std::min(budget.evaluations(), pool_size);
    std::vector<std::size_t> idx(pool_size);
    std::vector<double> finals(n_sim_runs);
    for (std::size_t r = 0; r < n_sim_runs; ++r) {
        Rng rng(seed_mix(seed, "sim", r));
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        double best = kInf;
        for (std::size_t j = 0; j < draws; ++j) {
            std::swap(idx[j], idx[j + rng.uniform_below(pool_size - j)]);
            const double v = visible[idx[j]];
            if (std::isfinite(v) && v < best) {
                best = v;
            }
        }
        finals[r] = best;
    }
    const double rand_mean =
        std::accumulate(finals.begin(), finals.end(), 0.0) / double(n_sim_runs);

    Baseline b;
    b.objective_id = obj.id;
    b.n_step = budget.n_step;
    b.n_batch = budget.n_batch;
    b.rand_opt = rand_opt;
    b.rand_mean = rand_mean;
    b.pool_size = pool_size;
    b.n_sim_runs = n_sim_runs;
    b.seed = seed;
    b.best_pool_params = pool[best_idx];
    b.sim_final_minima = std::move(finals);
    require_non_degenerate(b, "build_baseline");
    return b;
}

double normalize(double perf, const Baseline& b) {
    const double span = require_non_degenerate(b, "normalize");
    if (!std::isfinite(perf)) {
        return 1.0;
    }
    return std::clamp((perf - b.rand_opt) / span, -1.0, 1.0);
}

std::vector<double> cumulative_min(const std::vector<double>& series) {
    if (series.empty()) {
        throw StateError("cumulative_min: series is empty");
    }
    std::vector<double> out(series.size());
    double best = kInf;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (std::isfinite(series[i]) && series[i] < best) {
            best = series[i];
        }
        out[i] = best;
    }
    return out;
}

AggregateResult aggregate(const std::vector<StudyReport>& reports, ScoreKind which) {
    if (reports.empty()) {
        throw StateError("aggregate: no reports");
    }

    std::set<std::string> opt_set;
    std::set<std::string> obj_set;
    std::size_t n_repeats = 0;
    for (const auto& r : reports) {
        opt_set.insert(r.optimizer_name);
        obj_set.insert(r.objective_id);
        n_repeats = std::max(n_repeats, r.repeat_idx + 1);
    }

    AggregateResult out;
    out.optimizers.assign(opt_set.begin(), opt_set.end());
    out.objectives.assign(obj_set.begin(), obj_set.end());
    out.n_repeats = n_repeats;

    std::map<std::tuple<std::string, std::string, std::size_t>, double> cells;
    for (const auto& r : reports) {
        const double score = which == ScoreKind::Visible ? r.norm_visible : r.norm_holdout;
        auto key = std::make_tuple(r.optimizer_name, r.objective_id, r.repeat_idx);
        if (!cells.emplace(std::move(key), score).second) {
            throw DataError("aggregate: duplicate report for optimizer '" +
                            r.optimizer_name + "' objective '" + r.objective_id +
                            "' repeat " + std::to_string(r.repeat_idx));
        }
    }

    std::vector<std::string> gaps;
    for (const auto& opt : out.optimizers) {
        for (const auto& obj : out.objectives) {
            for (std::size_t rep = 0; rep < n_repeats; ++rep) {
                if (!cells.count(std::make_tuple(opt, obj, rep))) {
                    gaps.push_back("optimizer '" + opt + "' objective '" + obj +
                                   "' repeat " + std::to_string(rep));
                }
            }
        }
    }
    if (!gaps.empty()) {
        throw IncompleteGridError("aggregate: result grid is missing " +
                                      std::to_string(gaps.size()) + " cell(s)",
                                  gaps);
    }

    out.matrix.assign(out.optimizers.size(),
                      std::vector<double>(out.objectives.size(), 0.0));
    out.mean_norm.assign(out.optimizers.size(), 0.0);
    for (std::size_t i = 0; i < out.optimizers.size(); ++i) {
        for (std::size_t j = 0; j < out.objectives.size(); ++j) {
            double sum = 0.0;
            for (std::size_t rep = 0; rep < n_repeats; ++rep) {
                sum += cells.at(
                    std::make_tuple(out.optimizers[i], out.objectives[j], rep));
            }
            out.matrix[i][j] = sum / double(n_repeats);
            out.mean_norm[i] += out.matrix[i][j];
        }
        out.mean_norm[i] /= double(out.objectives.size());
    }

    out.best_per_objective.assign(out.objectives.size(), 0);
    for (std::size_t j = 0; j < out.objectives.size(); ++j) {
        for (std::size_t i = 1; i < out.optimizers.size(); ++i) {
            if (out.matrix[i][j] < out.matrix[out.best_per_objective[j]][j]) {
                out.best_per_objective[j] = i;
            }
        }
    }
    return out;
}

double leaderboard_score(double mean_norm) {
    if (std::isnan(mean_norm)) {
        throw DataError("leaderboard_score: mean_norm is NaN");
    }
    return std::clamp(100.0 * (1.0 - mean_norm), 0.0, 100.0);
}

std::string baseline_to_json(const Baseline& b) {
    json j;
    j["objective_id"] = b.objective_id;
    j["n_step"] = b.n_step;
    j["n_batch"] = b.n_batch;
    j["rand_opt"] = b.rand_opt;
    j["rand_mean"] = b.rand_mean;
    j["pool_size"] = b.pool_size;
    j["n_sim_runs"] = b.n_sim_runs;
    j["seed"] = b.seed;
    j["best_pool_params"] = json::parse(params_to_json(b.best_pool_params));
    j["sim_final_minima"] = b.sim_final_minima;
    return j.dump(2);
}

Baseline baseline_from_json(const SearchSpace& space, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("baseline file is not valid JSON: ") + e.what());
    }
    const char* const keys[] = {"objective_id",   "n_step", "n_batch",
                                "rand_opt",       "rand_mean", "pool_size",
                                "n_sim_runs",     "seed",   "best_pool_params",
                                "sim_final_minima"};
    for (const char* key : keys) {
        if (!j.is_object() || !j.contains(key)) {
            throw ConfigError(std::string("baseline file is missing '") + key + "'");
        }
    }
    Baseline b;
    try {
        b.objective_id = j.at("objective_id").get<std::string>();
        b.n_step = j.at("n_step").get<std::size_t>();
        b.n_batch = j.at("n_batch").get<std::size_t>();
        b.rand_opt = j.at("rand_opt").get<double>();
        b.rand_mean = j.at("rand_mean").get<double>();
        b.pool_size = j.at("pool_size").get<std::size_t>();
        b.n_sim_runs = j.at("n_sim_runs").get<std::size_t>();
        b.seed = j.at("seed").get<std::uint64_t>();
        b.sim_final_minima = j.at("sim_final_minima").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("baseline file has a mistyped field: ") + e.what());
    }
    b.best_pool_params = params_from_json(space, j.at("best_pool_params").dump());
    return b;
}

} // namespace bbo
