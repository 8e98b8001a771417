#include "bbo/optimizer.hpp"

#include <cmath>
#include <utility>

#include "bbo/ensemble.hpp"
#include "bbo/errors.hpp"
#include "bbo/optimizers.hpp"
#include "bbo/rng.hpp"

namespace bbo {

void ObservationHistory::append(const ParamVector& params, double score) {
    records_.push_back({params, score});
    if (std::isfinite(score)) {
        ++finite_count_;
        // Strict comparison keeps the earliest record on ties.
        if (best_index_ < 0 || score < records_[static_cast<std::size_t>(best_index_)].score) {
            best_index_ = static_cast<std::ptrdiff_t>(records_.size()) - 1;
        }
    }
}

double ObservationHistory::best_score() const {
    if (best_index_ < 0) {
        throw StateError("history has no finite observation");
    }
    return records_[static_cast<std::size_t>(best_index_)].score;
}

const ParamVector& ObservationHistory::best_params() const {
    if (best_index_ < 0) {
        throw StateError("history has no finite observation");
    }
    return records_[static_cast<std::size_t>(best_index_)].params;
}

std::vector<Observation> ObservationHistory::finite_records() const {
    std::vector<Observation> out;
    out.reserve(finite_count_);
    for (const auto& rec : records_) {
        if (std::isfinite(rec.score)) {
            out.push_back(rec);
        }
    }
    return out;
}

Optimizer::Optimizer(std::string name, SearchSpace space)
    : name_(std::move(name)), space_(std::move(space)) {}

void Optimizer::observe(const std::vector<ParamVector>& params,
                        const std::vector<double>& scores) {
    if (params.size() != scores.size()) {
        throw ShapeError("observe: " + std::to_string(params.size()) + " params vs " +
                         std::to_string(scores.size()) + " scores");
    }
    for (const auto& p : params) {
        space_.validate(p);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        history_.append(params[i], scores[i]);
    }
    on_observe(params, scores);
}

void Optimizer::on_observe(const std::vector<ParamVector>&, const std::vector<double>&) {}

std::size_t default_init_points(const SearchSpace& space) {
    return std::min<std::size_t>(2 * space.warped_dim(), 8);
}

namespace {

/// Consumes hyperparameter entries one by one; leftovers are unknown keys.
class HyperReader {
public:
    HyperReader(std::string optimizer, const std::map<std::string, double>& hp)
        : optimizer_(std::move(optimizer)), pending_(hp) {}

    double number(const std::string& key, double fallback, double lo, double hi,
                  bool lo_open, bool hi_open) {
        auto it = pending_.find(key);
        if (it == pending_.end()) {
            return fallback;
        }
        const double v = it->second;
        pending_.erase(it);
        const bool below = lo_open ? v <= lo : v < lo;
        const bool above = hi_open ? v >= hi : v > hi;
        if (!std::isfinite(v) || below || above) {
            throw ConfigError(optimizer_ + ": hyperparam '" + key + "' = " +
                              std::to_string(v) + " out of range");
        }
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
        auto it = pending_.find(key);
        if (it == pending_.end()) {
            return fallback;
        }
        const double v = it->second;
        pending_.erase(it);
        if (!std::isfinite(v) || v != std::floor(v) || v < static_cast<double>(min_value)) {
            throw ConfigError(optimizer_ + ": hyperparam '" + key + "' = " +
                              std::to_string(v) + " must be an integer >= " +
                              std::to_string(min_value));
        }
        return static_cast<std::size_t>(v);
    }

    bool flag(const std::string& key, bool fallback) {
        auto it = pending_.find(key);
        if (it == pending_.end()) {
            return fallback;
        }
        const double v = it->second;
        pending_.erase(it);
        if (v != 0.0 && v != 1.0) {
            throw ConfigError(optimizer_ + ": hyperparam '" + key + "' must be 0 or 1");
        }
        return v == 1.0;
    }

    void done() const {
        if (!pending_.empty()) {
            throw ConfigError(optimizer_ + ": unknown hyperparam '" +
                              pending_.begin()->first + "'");
        }
    }

private:
    std::string optimizer_;
    std::map<std::string, double> pending_;
};

std::unique_ptr<Optimizer> make_single(const std::string& name,
                                       const std::map<std::string, double>& hp,
                                       std::uint64_t seed, const SearchSpace& space) {
    HyperReader read(name, hp);
    if (name == "random") {
        read.done();
        return std::make_unique<RandomOptimizer>(space, seed);
    }
    if (name == "tpe") {
        TpeConfig cfg;
        cfg.gamma = read.number("gamma", cfg.gamma, 0.0, 1.0, true, true);
        cfg.n_candidates = read.count("candidates", cfg.n_candidates, 1);
        cfg.init_points = read.count("init_points", 0, 1);
        read.done();
        return std::make_unique<TpeOptimizer>(space, seed, cfg);
    }
    if (name == "gpei") {
        GpEiConfig cfg;
        cfg.n_candidates = read.count("candidates", cfg.n_candidates, 1);
        cfg.mle_grid = read.flag("mle_grid", cfg.mle_grid);
        cfg.init_points = read.count("init_points", 0, 1);
        read.done();
        return std::make_unique<GpEiOptimizer>(space, seed, cfg);
    }
    if (name == "turbo") {
        TurboConfig cfg;
        cfg.trust.l_init = read.number("l_init", cfg.trust.l_init, 0.0, 16.0, true, false);
        cfg.trust.l_min = read.number("l_min", cfg.trust.l_min, 0.0, 16.0, true, false);
        cfg.trust.l_max = read.number("l_max", cfg.trust.l_max, 0.0, 16.0, true, false);
        cfg.trust.tau_succ = static_cast<int>(read.count("tau_succ", 3, 1));
        cfg.trust.tau_fail = static_cast<int>(read.count("tau_fail", 3, 1));
        cfg.n_candidates = read.count("candidates", cfg.n_candidates, 1);
        cfg.mle_grid = read.flag("mle_grid", cfg.mle_grid);
        cfg.init_points = read.count("init_points", 0, 1);
        read.done();
        if (cfg.trust.l_min > cfg.trust.l_init || cfg.trust.l_init > cfg.trust.l_max) {
            throw ConfigError("turbo: need l_min <= l_init <= l_max");
        }
        return std::make_unique<TurboOptimizer>(space, seed, cfg);
    }
    if (name == "de") {
        DeConfig cfg;
        cfg.f = read.number("f", cfg.f, 0.0, 2.0, false, true);
        cfg.cr = read.number("cr", cfg.cr, 0.0, 1.0, false, false);
        cfg.pop_size = read.count("population", cfg.pop_size, 4);
        cfg.init_points = read.count("init_points", 0, 1);
        read.done();
        return std::make_unique<DeOptimizer>(space, seed, cfg);
    }
    if (name == "anneal") {
        AnnealConfig cfg;
        cfg.t0 = read.number("t0", cfg.t0, 0.0, 16.0, true, false);
        cfg.alpha = read.number("alpha", cfg.alpha, 0.0, 1.0, true, true);
        cfg.init_points = read.count("init_points", 0, 1);
        read.done();
        return std::make_unique<AnnealOptimizer>(space, seed, cfg);
    }
    throw ConfigError("unknown optimizer '" + name + "'");
}

std::vector<std::string> split_plus(const std::string& name) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = name.find('+', start);
        if (pos == std::string::npos) {
            parts.push_back(name.substr(start));
            return parts;
        }
        parts.push_back(name.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

const std::vector<std::string>& base_optimizer_names() {
    static const std::vector<std::string> names = {"random", "tpe",    "gpei",
                                                   "turbo",  "de",     "anneal"};
    return names;
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, const SearchSpace& space) {
    const auto parts = split_plus(spec.name);
    if (parts.size() == 1) {
        return make_single(spec.name, spec.hyperparams, spec.seed, space);
    }
    if (!spec.hyperparams.empty()) {
        throw ConfigError("ensemble '" + spec.name +
                          "': constituent hyperparams are fixed at their defaults");
    }
    std::vector<std::unique_ptr<Optimizer>> constituents;
    constituents.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].empty()) {
            throw ConfigError("ensemble '" + spec.name + "': empty constituent name");
        }
        constituents.push_back(
            make_single(parts[i], {}, ensemble_constituent_seed(spec.seed, i), space));
    }
    return std::make_unique<EnsembleOptimizer>(space, std::move(constituents));
}

} // namespace bbo
