#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bbo/errors.hpp"
#include "bbo/optimizer.hpp"
#include "bbo/optimizers.hpp"
#include "bbo/rng.hpp"
#include "bbo/space.hpp"
#include "conformance.hpp"

using namespace bbo;

namespace {

SearchSpace mixed_space() {
    return SearchSpace({
        ParamSpec::real("lr", 1.0, 100.0, Scale::Log),
        ParamSpec::real("momentum", 0.0, 1.0),
        ParamSpec::integer("depth", 0, 10),
        ParamSpec::categorical("kernel", {"a", "b", "c", "d"}),
        ParamSpec::boolean("shuffle"),
    });
}

SearchSpace real_space(std::size_t dim) {
    std::vector<ParamSpec> specs;
    for (std::size_t i = 0; i < dim; ++i) {
        specs.push_back(ParamSpec::real("x" + std::to_string(i), 0.0, 1.0));
    }
    return SearchSpace(specs);
}

ParamVector real_point(const std::vector<double>& coords) {
    ParamVector p;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        p.values["x" + std::to_string(i)] = coords[i];
    }
    return p;
}

std::vector<Observation> lhs_population(const SearchSpace& space, std::size_t n,
                                        std::uint64_t seed) {
    std::vector<Observation> pop;
    auto pts = latin_hypercube(space, n, seed);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pop.push_back({pts[i], static_cast<double>(i)});
    }
    return pop;
}

} // namespace

TEST_CASE("history tracks the running minimum, earliest on ties") {
    ObservationHistory h;
    CHECK_FALSE(h.has_best());
    CHECK_THROWS_AS(h.best_score(), StateError);
    CHECK_THROWS_AS(h.best_params(), StateError);

    auto space = real_space(1);
    const auto p1 = real_point({0.1});
    const auto p2 = real_point({0.2});
    const auto p3 = real_point({0.3});

    h.append(p1, 2.0);
    CHECK(h.best_score() == 2.0);
    h.append(p2, 2.0); // tie: p1 stays
    CHECK(h.best_params() == p1);
    h.append(p3, 1.0);
    CHECK(h.best_score() == 1.0);
    CHECK(h.best_params() == p3);
    CHECK(h.size() == 3);
    CHECK(h.finite_count() == 3);
}

TEST_CASE("history stores non-finite scores without letting them win") {
    auto space = real_space(1);
    ObservationHistory h;
    h.append(real_point({0.5}), std::numeric_limits<double>::quiet_NaN());
    CHECK(h.size() == 1);
    CHECK(h.finite_count() == 0);
    CHECK_FALSE(h.has_best());

    h.append(real_point({0.6}), 3.0);
    h.append(real_point({0.7}), -std::numeric_limits<double>::infinity());
    CHECK(h.size() == 3);
    CHECK(h.finite_count() == 1);
    CHECK(h.best_score() == 3.0);
    CHECK(h.finite_records().size() == 1);
}

TEST_CASE("quantile split sizes and ordering") {
    auto space = real_space(1);
    std::vector<Observation> records;
    for (int i = 0; i < 8; ++i) {
        records.push_back({real_point({0.1 * i}), static_cast<double>(7 - i)});
    }

    auto [good, bad] = tpe_split(records, 0.25);
    CHECK(good.size() == 2); // ceil(0.25 * 8)
    CHECK(bad.size() == 6);
    CHECK(good[0].score == 0.0);
    CHECK(good[1].score == 1.0);
    CHECK(std::is_sorted(bad.begin(), bad.end(),
                         [](const Observation& a, const Observation& b) {
                             return a.score < b.score;
                         }));

    SUBCASE("single record keeps the minimum-one rule") {
        std::vector<Observation> one = {{real_point({0.5}), 4.0}};
        auto [g, b] = tpe_split(one, 0.25);
        CHECK(g.size() == 1);
        CHECK(b.empty());
    }

    SUBCASE("even split at gamma one half") {
        std::vector<Observation> ten;
        for (int i = 0; i < 10; ++i) {
            ten.push_back({real_point({0.05 * i}), static_cast<double>(i)});
        }
        auto [g, b] = tpe_split(ten, 0.5);
        CHECK(g.size() == 5);
        CHECK(b.size() == 5);
    }

    SUBCASE("ties keep insertion order") {
        std::vector<Observation> tied = {{real_point({0.1}), 1.0},
                                         {real_point({0.2}), 1.0},
                                         {real_point({0.3}), 0.0}};
        auto [g, b] = tpe_split(tied, 0.5);
        CHECK(g.size() == 2);
        CHECK(g[0].params == real_point({0.3}));
        CHECK(g[1].params == real_point({0.1}));
        CHECK(b[0].params == real_point({0.2}));
    }

    SUBCASE("non-finite records are ignored by the split") {
        auto noisy = records;
        noisy.push_back({real_point({0.9}), std::numeric_limits<double>::quiet_NaN()});
        auto [g, b] = tpe_split(noisy, 0.25);
        CHECK(g.size() + b.size() == 8);
    }

    CHECK_THROWS_AS(tpe_split(std::vector<Observation>{}, 0.25), StateError);
    CHECK_THROWS_AS(tpe_split(records, 0.0), DomainError);
    CHECK_THROWS_AS(tpe_split(records, 1.0), DomainError);
}

TEST_CASE("density proposals concentrate on a collapsed good set") {
    auto space = real_space(2);
    std::vector<Observation> good;
    for (int i = 0; i < 5; ++i) {
        good.push_back({real_point({0.4, 0.7}), 1.0});
    }

    int close = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Rng rng(1000 + t);
        auto prop = tpe_propose(space, good, {}, 24, rng);
        const auto w = warp(space, prop);
        // Bandwidth floor is 1e-3; nearly all mass sits within 3 floors.
        if (std::abs(w.coords[0] - 0.4) <= 3e-3 && std::abs(w.coords[1] - 0.7) <= 3e-3) {
            ++close;
        }
    }
    CHECK(close >= static_cast<int>(0.95 * trials));
}

TEST_CASE("density proposals prefer the good cluster over the bad one") {
    auto space = real_space(1);
    std::vector<Observation> good, bad;
    Rng jitter(9);
    for (int i = 0; i < 6; ++i) {
        good.push_back({real_point({0.2 + 0.01 * jitter.normal()}), 0.0});
        bad.push_back({real_point({0.8 + 0.01 * jitter.normal()}), 10.0});
    }
    for (int t = 0; t < 20; ++t) {
        Rng rng(500 + t);
        auto prop = tpe_propose(space, good, bad, 24, rng);
        const double x = warp(space, prop).coords[0];
        CHECK(std::abs(x - 0.2) < std::abs(x - 0.8));
    }
}

TEST_CASE("density proposals are deterministic per seed and need a good set") {
    auto space = mixed_space();
    auto pop = lhs_population(space, 6, 3);
    Rng r1(42), r2(42);
    CHECK(tpe_propose(space, pop, {}, 24, r1) == tpe_propose(space, pop, {}, 24, r2));
    Rng r3(42);
    CHECK_THROWS_AS(tpe_propose(space, {}, pop, 24, r3), StateError);
}

TEST_CASE("trust region doubles after three straight successes") {
    auto space = real_space(2);
    Rng rng(1);
    TrustRegionConfig cfg;
    TrustRegionState st;
    st.length = 0.4;
    st.success_streak = 2;
    st.center.coords = {0.5, 0.5};
    st = trust_region_update(st, 1.0, 2.0, cfg, space, rng);
    CHECK(st.length == 0.8);
    CHECK(st.success_streak == 0);
    CHECK(st.failure_streak == 0);
    CHECK(st.restart_count == 0);

    SUBCASE("doubling caps at the maximum length") {
        TrustRegionState wide;
        wide.length = 1.0;
        wide.success_streak = 2;
        wide.center.coords = {0.5, 0.5};
        wide = trust_region_update(wide, 1.0, 2.0, cfg, space, rng);
        CHECK(wide.length == cfg.l_max);
    }
}

TEST_CASE("trust region restarts once halving crosses the floor") {
    auto space = real_space(2);
    Rng rng(7);
    TrustRegionConfig cfg;
    TrustRegionState st;
    st.length = cfg.l_min * 1.5;
    st.failure_streak = 2;
    st.center.coords = {0.25, 0.75};
    const auto old_center = st.center;

    st = trust_region_update(st, 5.0, 1.0, cfg, space, rng);
    CHECK(st.length == cfg.l_init);
    CHECK(st.restart_count == 1);
    CHECK(st.success_streak == 0);
    CHECK(st.failure_streak == 0);
    CHECK_FALSE(st.center == old_center);
    for (double c : st.center.coords) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("alternating batches never move the trust region length") {
    auto space = real_space(2);
    Rng rng(3);
    TrustRegionConfig cfg;
    TrustRegionState st;
    st.center.coords = {0.5, 0.5};
    for (int i = 0; i < 30; ++i) {
        const bool success = i % 2 == 0;
        st = trust_region_update(st, success ? 0.0 : 2.0, 1.0, cfg, space, rng);
        CHECK(st.length == cfg.l_init);
        CHECK((st.success_streak == 0 || st.failure_streak == 0));
    }
    CHECK(st.restart_count == 0);

    Rng rng2(4);
    CHECK_THROWS_AS(
        trust_region_update(st, std::numeric_limits<double>::quiet_NaN(), 1.0, cfg, space, rng2),
        DataError);
}

TEST_CASE("zero-scale evolution step reproduces population members") {
    auto space = real_space(3);
    auto pop = lhs_population(space, 6, 11);
    Rng rng(21);
    // f = 0 makes the mutant its base vector; cr = 1 crosses every
    // coordinate, so each trial must equal some member exactly.
    auto trials = de_step(space, pop, 0.0, 1.0, 10, rng);
    for (const auto& t : trials) {
        const bool member = std::any_of(pop.begin(), pop.end(), [&](const Observation& o) {
            return o.params == t;
        });
        CHECK(member);
    }
}

TEST_CASE("evolution trials stay in domain at large scale factors") {
    auto space = mixed_space();
    auto pop = lhs_population(space, 8, 13);
    Rng rng(31);
    for (const auto& t : de_step(space, pop, 1.9, 0.5, 40, rng)) {
        CHECK_NOTHROW(space.validate(t));
    }
}

TEST_CASE("evolution step argument checks") {
    auto space = real_space(2);
    auto pop = lhs_population(space, 4, 17);
    Rng rng(5);
    CHECK_THROWS_AS(de_step(space, lhs_population(space, 3, 17), 0.8, 0.9, 1, rng), StateError);
    CHECK_THROWS_AS(de_step(space, pop, 2.0, 0.9, 1, rng), DomainError);
    CHECK_THROWS_AS(de_step(space, pop, -0.1, 0.9, 1, rng), DomainError);
    CHECK_THROWS_AS(de_step(space, pop, 0.8, 1.5, 1, rng), DomainError);

    Rng r1(8), r2(8);
    CHECK(de_step(space, pop, 0.8, 0.9, 6, r1) == de_step(space, pop, 0.8, 0.9, 6, r2));
}

TEST_CASE("perturbation stddev starts at t0 and decays to zero") {
    auto space = real_space(1);
    const auto incumbent = real_point({0.5});
    AnnealConfig cfg;

    Rng rng(77);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const double x = warp(space, anneal_propose(space, incumbent, 0, cfg, rng)).coords[0];
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(mean == doctest::Approx(0.5).epsilon(0.05));
    // Clamping to [0, 1] trims the tails of a 0.25-stddev Gaussian a bit.
    CHECK(sd > 0.21);
    CHECK(sd < 0.26);

    SUBCASE("late iterations pin the proposal to the incumbent") {
        auto mixed = mixed_space();
        auto base = unwarp(mixed, latin_hypercube_warped(mixed, 1, rng)[0]);
        const auto base_w = warp(mixed, base);
        for (int i = 0; i < 50; ++i) {
            const auto prop_w = warp(mixed, anneal_propose(mixed, base, 100, cfg, rng));
            for (std::size_t d = 0; d < base_w.coords.size(); ++d) {
                CHECK(std::abs(prop_w.coords[d] - base_w.coords[d]) <= 1e-6);
            }
        }
    }
}

TEST_CASE("categorical resampling fires at the schedule rate") {
    auto space = SearchSpace({ParamSpec::categorical("k", {"a", "b", "c", "d"})});
    ParamVector incumbent;
    incumbent.values["k"] = std::string("a");
    AnnealConfig cfg;
    Rng rng(91);
    int changed = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        if (!(anneal_propose(space, incumbent, 0, cfg, rng) == incumbent)) {
            ++changed;
        }
    }
    // Resample probability 0.25, of which 3 in 4 land on a new choice.
    const double frac = static_cast<double>(changed) / n;
    CHECK(frac > 0.16);
    CHECK(frac < 0.215);
}

TEST_CASE("model-based optimizers warm up with stratified batches") {
    auto space = real_space(3); // warm-up is min(2 * 3, 8) = 6 points
    for (const auto& name : {"tpe", "gpei", "turbo", "de", "anneal"}) {
        CAPTURE(name);
        auto opt = make_optimizer({name, {}, 2024}, space);
        auto pts = opt->suggest(8);
        REQUIRE(pts.size() == 8);
        for (std::size_t d = 0; d < 3; ++d) {
            std::set<int> strata;
            for (const auto& p : pts) {
                strata.insert(static_cast<int>(std::floor(8.0 * warp(space, p).coords[d])));
            }
            CHECK(strata == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7});
        }
    }
}

TEST_CASE("acquisition picks maximize improvement over their candidates") {
    auto space = real_space(2); // warm-up 4
    GpEiOptimizer opt(space, 7);
    auto warm = opt.suggest(4);
    std::vector<double> scores;
    for (const auto& p : warm) {
        scores.push_back(testconf::synthetic_score(space, p));
    }
    opt.observe(warm, scores);

    auto pts = opt.suggest(8);
    REQUIRE(pts.size() == 8);
    const auto& picks = opt.last_picks();
    REQUIRE(picks.size() == 8);
    for (const auto& pick : picks) {
        REQUIRE(pick.candidates.size() == 512);
        double best_ei = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < pick.candidates.size(); ++i) {
            const double ei = expected_improvement(pick.mu[i], pick.sigma[i], pick.f_best);
            if (ei > best_ei) {
                best_ei = ei;
                best_idx = i;
            }
        }
        CHECK(pick.chosen == best_idx);
    }
}

TEST_CASE("trust-region suggestions stay inside the live box") {
    auto space = real_space(2); // warm-up 4; warp is the identity here
    TurboOptimizer opt(space, 19);

    auto drive = [&](const std::vector<ParamVector>& pts, double level) {
        std::vector<double> scores(pts.size(), level);
        opt.observe(pts, scores);
    };

    auto warm = opt.suggest(4);
    drive(warm, 5.0);

    // Worsening batches: three failures halve the box each time, and
    // enough of them push the length under its floor and force a restart.
    bool saw_restart = false;
    for (int batch = 0; batch < 20; ++batch) {
        auto pts = opt.suggest(2);
        REQUIRE(pts.size() == 2);
        const auto& st = opt.state();
        for (const auto& p : pts) {
            const auto w = warp(space, p);
            for (std::size_t d = 0; d < 2; ++d) {
                CHECK(w.coords[d] >= std::max(0.0, st.center.coords[d] - 0.5 * st.length) - 1e-12);
                CHECK(w.coords[d] <= std::min(1.0, st.center.coords[d] + 0.5 * st.length) + 1e-12);
            }
        }
        drive(pts, 100.0 + batch);
        if (opt.state().restart_count > 0 && !saw_restart) {
            saw_restart = true;
            CHECK(opt.state().length == doctest::Approx(0.8));
        }
    }
    CHECK(saw_restart);

    // Post-restart suggestions remain valid and keep to the new box.
    auto pts = opt.suggest(4);
    const auto& st = opt.state();
    for (const auto& p : pts) {
        CHECK_NOTHROW(space.validate(p));
        const auto w = warp(space, p);
        for (std::size_t d = 0; d < 2; ++d) {
            CHECK(w.coords[d] >= std::max(0.0, st.center.coords[d] - 0.5 * st.length) - 1e-12);
            CHECK(w.coords[d] <= std::min(1.0, st.center.coords[d] + 0.5 * st.length) + 1e-12);
        }
    }
}

TEST_CASE("registry rejects unknown names and bad hyperparameters") {
    auto space = real_space(2);
    CHECK_THROWS_AS(make_optimizer({"sobol", {}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"random", {{"gamma", 0.5}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"tpe", {{"gamma", 1.5}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"tpe", {{"gamma", 0.0}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"de", {{"population", 3.0}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"de", {{"f", 2.5}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"anneal", {{"alpha", 1.0}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"gpei", {{"candidates", 0.0}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"gpei", {{"mle_grid", 0.5}}, 1}, space), ConfigError);
    CHECK_THROWS_AS(make_optimizer({"turbo", {{"l_min", 1.0}, {"l_init", 0.5}}, 1}, space),
                    ConfigError);

    CHECK(base_optimizer_names().size() == 6);
    for (const auto& name : base_optimizer_names()) {
        auto opt = make_optimizer({name, {}, 5}, space);
        CHECK(opt->name() == name);
    }

    auto tuned = make_optimizer({"tpe", {{"gamma", 0.3}, {"init_points", 2.0}}, 5}, space);
    auto pts = tuned->suggest(2);
    tuned->observe(pts, {1.0, 2.0});
    CHECK(tuned->suggest(8).size() == 8);
}

TEST_CASE("every base optimizer honors the suggest/observe contract") {
    auto space = mixed_space();
    for (const auto& name : base_optimizer_names()) {
        CAPTURE(name);
        testconf::run_conformance(space, [&](std::uint64_t seed) {
            return make_optimizer({name, {}, seed}, space);
        });
    }
}
