#include "bbo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kBadDensityFloorLog = -27.631021115928547; // ln 1e-12

std::vector<ParamVector> lhs_points(const SearchSpace& space, std::size_t n, Rng& rng) {
    std::vector<ParamVector> out;
    out.reserve(n);
    for (const auto& w : latin_hypercube_warped(space, n, rng)) {
        out.push_back(unwarp(space, w));
    }
    return out;
}

std::size_t resolve_init(const SearchSpace& space, std::size_t requested) {
    return requested == 0 ? default_init_points(space) : requested;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

/// EI over an explicit candidate list; ties keep the first maximizer.
CandidatePick pick_by_ei(const GpModel& model, std::vector<UnitVector> candidates,
                         double f_best) {
    CandidatePick pick;
    pick.f_best = f_best;
    pick.mu.reserve(candidates.size());
    pick.sigma.reserve(candidates.size());
    double best_ei = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto pred = gp_predict(model, candidates[i]);
        pick.mu.push_back(pred.mu);
        pick.sigma.push_back(pred.sigma);
        const double ei = expected_improvement(pred.mu, pred.sigma, f_best);
        if (ei > best_ei) {
            best_ei = ei;
            pick.chosen = i;
        }
    }
    pick.candidates = std::move(candidates);
    return pick;
}

/// Constant-liar batch: refit, pick the EI argmax, append the pick with a
/// lied score of f_best, repeat. candidate_gen(i) supplies pick i's set.
template <typename CandidateGen>
std::vector<ParamVector> liar_batch(const SearchSpace& space, std::vector<UnitVector> inputs,
                                    std::vector<double> targets, std::size_t n,
                                    bool mle_grid, CandidateGen&& candidate_gen,
                                    std::vector<CandidatePick>& picks_out) {
    GpConfig gp_cfg;
    gp_cfg.mle_grid = mle_grid;
    const double f_best = *std::min_element(targets.begin(), targets.end());
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto model = gp_fit(inputs, targets, gp_cfg);
        auto pick = pick_by_ei(model, candidate_gen(), f_best);
        const UnitVector& won = pick.candidates[pick.chosen];
        out.push_back(unwarp(space, won));
        inputs.push_back(won);
        targets.push_back(f_best);
        picks_out.push_back(std::move(pick));
    }
    return out;
}

std::vector<UnitVector> warp_all(const SearchSpace& space,
                                 const std::vector<Observation>& records) {
    std::vector<UnitVector> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        out.push_back(warp(space, rec.params));
    }
    return out;
}

std::vector<double> scores_of(const std::vector<Observation>& records) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        out.push_back(rec.score);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- random

RandomOptimizer::RandomOptimizer(const SearchSpace& space, std::uint64_t seed)
    : Optimizer("random", space), rng_(seed) {}

std::vector<ParamVector> RandomOptimizer::suggest(std::size_t n) {
    std::vector<ParamVector> out;
    out.reserve(n);
    for (const auto& w : sample_uniform_warped(space(), n, rng_)) {
        out.push_back(unwarp(space(), w));
    }
    return out;
}

// ------------------------------------------------------------------- tpe

std::pair<std::vector<Observation>, std::vector<Observation>>
tpe_split(const std::vector<Observation>& records, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw DomainError("tpe_split: gamma = " + std::to_string(gamma) +
                          " outside (0, 1)");
    }
    std::vector<Observation> finite;
    finite.reserve(records.size());
    for (const auto& rec : records) {
        if (std::isfinite(rec.score)) {
            finite.push_back(rec);
        }
    }
    if (finite.empty()) {
        throw StateError("tpe_split: no finite records");
    }
    // stable_sort keeps insertion order among equal scores.
    std::stable_sort(finite.begin(), finite.end(),
                     [](const Observation& a, const Observation& b) { return a.score < b.score; });
    const auto n_good = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(finite.size()))));
    std::vector<Observation> good(finite.begin(),
                                  finite.begin() + static_cast<std::ptrdiff_t>(n_good));
    std::vector<Observation> bad(finite.begin() + static_cast<std::ptrdiff_t>(n_good),
                                 finite.end());
    return {std::move(good), std::move(bad)};
}

std::pair<std::vector<Observation>, std::vector<Observation>>
tpe_split(const ObservationHistory& history, double gamma) {
    return tpe_split(history.records(), gamma);
}

namespace {

/// Per-parameter density of one tpe_split half: Gaussian mixture on each
/// numeric warped coordinate, add-one-smoothed frequencies on categoricals.
struct HalfDensity {
    struct Block {
        bool categorical = false;
        std::size_t offset = 0;
        std::size_t width = 0;
        std::vector<double> centers; // numeric: one per record
        double bandwidth = 1.0;
        std::vector<double> probs; // categorical: one per choice
    };
    std::vector<Block> blocks;
    bool empty = true;
};

HalfDensity build_half_density(const SearchSpace& space,
                               const std::vector<UnitVector>& warped) {
    HalfDensity hd;
    hd.empty = warped.empty();
    if (hd.empty) {
        return hd;
    }
    const double n = static_cast<double>(warped.size());
    for (const auto& blk : space.blocks()) {
        HalfDensity::Block b;
        b.offset = blk.offset;
        b.width = blk.width;
        const auto& spec = space.specs()[blk.spec_index];
        if (spec.kind == ParamKind::Categorical) {
            b.categorical = true;
            std::vector<double> counts(blk.width, 0.0);
            for (const auto& w : warped) {
                const auto first = w.coords.begin() + static_cast<std::ptrdiff_t>(blk.offset);
                const auto arg = std::max_element(first, first + static_cast<std::ptrdiff_t>(blk.width));
                counts[static_cast<std::size_t>(arg - first)] += 1.0;
            }
            b.probs.resize(blk.width);
            for (std::size_t c = 0; c < blk.width; ++c) {
                b.probs[c] = (counts[c] + 1.0) / (n + static_cast<double>(blk.width));
            }
        } else {
            b.centers.reserve(warped.size());
            double mean = 0.0;
            for (const auto& w : warped) {
                b.centers.push_back(w.coords[blk.offset]);
                mean += w.coords[blk.offset];
            }
            mean /= n;
            double var = 0.0;
            for (double c : b.centers) {
                var += (c - mean) * (c - mean);
            }
            const double sd = warped.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
            // Scott's rule, one dimension at a time.
            b.bandwidth = std::clamp(sd * std::pow(n, -0.2), 1e-3, 1.0);
        }
        hd.blocks.push_back(std::move(b));
    }
    return hd;
}

double log_density(const HalfDensity& hd, const UnitVector& x) {
    double total = 0.0;
    for (const auto& b : hd.blocks) {
        if (b.categorical) {
            const auto first = x.coords.begin() + static_cast<std::ptrdiff_t>(b.offset);
            const auto arg = std::max_element(first, first + static_cast<std::ptrdiff_t>(b.width));
            total += std::log(b.probs[static_cast<std::size_t>(arg - first)]);
        } else {
            double mix = 0.0;
            const double v = x.coords[b.offset];
            for (double c : b.centers) {
                const double z = (v - c) / b.bandwidth;
                mix += std::exp(-0.5 * z * z);
            }
            mix *= kInvSqrt2Pi / (b.bandwidth * static_cast<double>(b.centers.size()));
            total += std::log(mix);
        }
    }
    return total;
}

UnitVector sample_from(const HalfDensity& hd, std::size_t dim, Rng& rng) {
    UnitVector x;
    x.coords.assign(dim, 0.0);
    for (const auto& b : hd.blocks) {
        if (b.categorical) {
            const double r = rng.uniform();
            double acc = 0.0;
            std::size_t choice = b.width - 1;
            for (std::size_t c = 0; c < b.width; ++c) {
                acc += b.probs[c];
                if (r < acc) {
                    choice = c;
                    break;
                }
            }
            x.coords[b.offset + choice] = 1.0;
        } else {
            const std::size_t j = rng.uniform_below(b.centers.size());
            x.coords[b.offset] = clamp01(b.centers[j] + b.bandwidth * rng.normal());
        }
    }
    return x;
}

} // namespace

ParamVector tpe_propose(const SearchSpace& space, const std::vector<Observation>& good,
                        const std::vector<Observation>& bad, std::size_t n_candidates,
                        Rng& rng) {
    if (good.empty()) {
        throw StateError("tpe_propose: good half is empty");
    }
    const auto good_density = build_half_density(space, warp_all(space, good));
    const auto bad_density = build_half_density(space, warp_all(space, bad));
    const std::size_t n = std::max<std::size_t>(1, n_candidates);

    UnitVector best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        auto cand = sample_from(good_density, space.warped_dim(), rng);
        const double lg = log_density(good_density, cand);
        const double lb = bad_density.empty ? kBadDensityFloorLog
                                            : std::max(log_density(bad_density, cand),
                                                       kBadDensityFloorLog);
        const double score = lg - lb;
        if (score > best_score) {
            best_score = score;
            best = std::move(cand);
        }
    }
    return unwarp(space, best);
}

TpeOptimizer::TpeOptimizer(const SearchSpace& space, std::uint64_t seed, TpeConfig cfg)
    : Optimizer("tpe", space), cfg_(cfg), init_points_(resolve_init(space, cfg.init_points)),
      rng_(seed) {}

std::vector<ParamVector> TpeOptimizer::suggest(std::size_t n) {
    if (history_.finite_count() < init_points_) {
        return lhs_points(space(), n, rng_);
    }
    auto records = history_.finite_records();
    const double lie = history_.best_score();
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto [good, bad] = tpe_split(records, cfg_.gamma);
        auto p = tpe_propose(space(), good, bad, cfg_.n_candidates, rng_);
        records.push_back({p, lie});
        out.push_back(std::move(p));
    }
    return out;
}

// ------------------------------------------------------------------ gpei

GpEiOptimizer::GpEiOptimizer(const SearchSpace& space, std::uint64_t seed, GpEiConfig cfg)
    : Optimizer("gpei", space), cfg_(cfg), init_points_(resolve_init(space, cfg.init_points)),
      rng_(seed) {}

std::vector<ParamVector> GpEiOptimizer::suggest(std::size_t n) {
    picks_.clear();
    if (history_.finite_count() < init_points_) {
        return lhs_points(space(), n, rng_);
    }
    const auto records = history_.finite_records();
    return liar_batch(
        space(), warp_all(space(), records), scores_of(records), n, cfg_.mle_grid,
        [&] { return latin_hypercube_warped(space(), cfg_.n_candidates, rng_); }, picks_);
}

// ----------------------------------------------------------------- turbo

TrustRegionState trust_region_update(TrustRegionState st, double batch_best, double incumbent,
                                     const TrustRegionConfig& cfg, const SearchSpace& space,
                                     Rng& rng) {
    if (!std::isfinite(batch_best) || !std::isfinite(incumbent)) {
        throw DataError("trust_region_update: scores must be finite");
    }
    if (batch_best < incumbent) {
        st.success_streak += 1;
        st.failure_streak = 0;
    } else {
        st.failure_streak += 1;
        st.success_streak = 0;
    }
    if (st.success_streak >= cfg.tau_succ) {
        st.length = std::min(2.0 * st.length, cfg.l_max);
        st.success_streak = 0;
    }
    if (st.failure_streak >= cfg.tau_fail) {
        st.length = 0.5 * st.length;
        st.failure_streak = 0;
    }
    if (st.length < cfg.l_min) {
        st.length = cfg.l_init;
        st.center = latin_hypercube_warped(space, 1, rng)[0];
        st.restart_count += 1;
        st.success_streak = 0;
        st.failure_streak = 0;
    }
    return st;
}

TurboOptimizer::TurboOptimizer(const SearchSpace& space, std::uint64_t seed, TurboConfig cfg)
    : Optimizer("turbo", space), cfg_(cfg), init_points_(resolve_init(space, cfg.init_points)),
      rng_(seed) {
    state_.length = cfg_.trust.l_init;
    state_.center.coords.assign(space.warped_dim(), 0.5);
}

std::vector<Observation> TurboOptimizer::epoch_records() const {
    std::vector<Observation> out;
    const auto& all = history_.records();
    for (std::size_t i = epoch_start_; i < all.size(); ++i) {
        if (std::isfinite(all[i].score)) {
            out.push_back(all[i]);
        }
    }
    return out;
}

std::vector<ParamVector> TurboOptimizer::suggest(std::size_t n) {
    picks_.clear();
    if (history_.finite_count() < init_points_) {
        return lhs_points(space(), n, rng_);
    }
    // Trust-region box, clamped to the cube.
    const std::size_t dim = space().warped_dim();
    std::vector<double> lo(dim), hi(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = clamp01(state_.center.coords[d] - 0.5 * state_.length);
        hi[d] = clamp01(state_.center.coords[d] + 0.5 * state_.length);
    }
    const auto in_box = [&](std::vector<UnitVector> pts) {
        for (auto& p : pts) {
            for (std::size_t d = 0; d < dim; ++d) {
                p.coords[d] = lo[d] + p.coords[d] * (hi[d] - lo[d]);
            }
        }
        return pts;
    };

    const auto records = epoch_records();
    if (records.empty()) {
        // Fresh restart: no local data yet, stratified fill of the box.
        std::vector<ParamVector> out;
        out.reserve(n);
        for (const auto& w : in_box(latin_hypercube_warped(space(), n, rng_))) {
            out.push_back(unwarp(space(), w));
        }
        return out;
    }
    return liar_batch(
        space(), warp_all(space(), records), scores_of(records), n, cfg_.mle_grid,
        [&] { return in_box(latin_hypercube_warped(space(), cfg_.n_candidates, rng_)); },
        picks_);
}

void TurboOptimizer::on_observe(const std::vector<ParamVector>& params,
                                const std::vector<double>& scores) {
    double batch_best = std::numeric_limits<double>::infinity();
    for (double s : scores) {
        if (std::isfinite(s) && s < batch_best) {
            batch_best = s;
        }
    }
    const double incumbent =
        epoch_best_ ? epoch_best_->score : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (std::isfinite(scores[i]) && (!epoch_best_ || scores[i] < epoch_best_->score)) {
            epoch_best_ = Observation{params[i], scores[i]};
        }
    }
    if (epoch_best_) {
        state_.center = warp(space(), epoch_best_->params);
    }
    // The first informative batch seeds the incumbent; streaks start after.
    if (std::isfinite(batch_best) && std::isfinite(incumbent)) {
        const int restarts_before = state_.restart_count;
        state_ = trust_region_update(state_, batch_best, incumbent, cfg_.trust, space(), rng_);
        if (state_.restart_count != restarts_before) {
            epoch_start_ = history_.size();
            epoch_best_.reset();
        }
    }
}

// -------------------------------------------------------------------- de

std::vector<ParamVector> de_step(const SearchSpace& space,
                                 const std::vector<Observation>& population, double f,
                                 double cr, std::size_t n, Rng& rng) {
    // f = 0 is allowed so the degenerate no-scale step stays expressible.
    if (!(f >= 0.0 && f < 2.0)) {
        throw DomainError("de_step: f = " + std::to_string(f) + " outside [0, 2)");
    }
    if (!(cr >= 0.0 && cr <= 1.0)) {
        throw DomainError("de_step: cr = " + std::to_string(cr) + " outside [0, 1]");
    }
    if (population.size() < 4) {
        throw StateError("de_step: population " + std::to_string(population.size()) +
                         " is under 4");
    }
    const auto pool = warp_all(space, population);
    const std::size_t dim = space.warped_dim();
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t target = i % pool.size();
        std::size_t a, b, c;
        do {
            a = rng.uniform_below(pool.size());
        } while (a == target);
        do {
            b = rng.uniform_below(pool.size());
        } while (b == target || b == a);
        do {
            c = rng.uniform_below(pool.size());
        } while (c == target || c == a || c == b);
        const std::size_t j_rand = rng.uniform_below(dim);
        UnitVector trial;
        trial.coords.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double mutant =
                clamp01(pool[a].coords[d] + f * (pool[b].coords[d] - pool[c].coords[d]));
            const bool cross = rng.uniform() < cr || d == j_rand;
            trial.coords[d] = cross ? mutant : pool[target].coords[d];
        }
        out.push_back(unwarp(space, trial));
    }
    return out;
}

DeOptimizer::DeOptimizer(const SearchSpace& space, std::uint64_t seed, DeConfig cfg)
    : Optimizer("de", space), cfg_(cfg),
      // rand/1/bin draws four distinct members, so warm-up must bank four.
      init_points_(std::max<std::size_t>(resolve_init(space, cfg.init_points), 4)),
      rng_(seed) {}

std::vector<ParamVector> DeOptimizer::suggest(std::size_t n) {
    if (history_.finite_count() < init_points_) {
        return lhs_points(space(), n, rng_);
    }
    auto finite = history_.finite_records();
    std::stable_sort(finite.begin(), finite.end(),
                     [](const Observation& a, const Observation& b) { return a.score < b.score; });
    finite.resize(std::min(finite.size(), cfg_.pop_size));
    return de_step(space(), finite, cfg_.f, cfg_.cr, n, rng_);
}

// ---------------------------------------------------------------- anneal

ParamVector anneal_propose(const SearchSpace& space, const ParamVector& incumbent,
                           std::size_t iter_id, const AnnealConfig& cfg, Rng& rng) {
    const double sched = cfg.t0 * std::pow(cfg.alpha, static_cast<double>(iter_id));
    auto u = warp(space, incumbent);
    for (const auto& blk : space.blocks()) {
        const auto& spec = space.specs()[blk.spec_index];
        if (spec.kind == ParamKind::Categorical) {
            if (rng.uniform() < sched) {
                const std::size_t choice = rng.uniform_below(blk.width);
                for (std::size_t c = 0; c < blk.width; ++c) {
                    u.coords[blk.offset + c] = c == choice ? 1.0 : 0.0;
                }
            }
        } else {
            u.coords[blk.offset] = clamp01(u.coords[blk.offset] + sched * rng.normal());
        }
    }
    return unwarp(space, u);
}

AnnealOptimizer::AnnealOptimizer(const SearchSpace& space, std::uint64_t seed, AnnealConfig cfg)
    : Optimizer("anneal", space), cfg_(cfg), init_points_(resolve_init(space, cfg.init_points)),
      rng_(seed) {}

std::vector<ParamVector> AnnealOptimizer::suggest(std::size_t n) {
    if (history_.finite_count() < init_points_) {
        return lhs_points(space(), n, rng_);
    }
    const ParamVector incumbent = history_.best_params();
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(anneal_propose(space(), incumbent, iter_id_, cfg_, rng_));
    }
    iter_id_ += 1;
    return out;
}

} // namespace bbo
