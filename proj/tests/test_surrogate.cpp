#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"
#include "bbo/surrogate.hpp"
#include "oracles.hpp"

using namespace bbo;

namespace {

UnitVector uv(std::initializer_list<double> coords) {
    UnitVector u;
    u.coords = coords;
    return u;
}

std::vector<UnitVector> random_inputs(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<UnitVector> out(n);
    for (auto& u : out) {
        u.coords.resize(dim);
        for (auto& c : u.coords) c = rng.uniform();
    }
    return out;
}

} // namespace

TEST_CASE("gp_fit input validation") {
    CHECK_THROWS_AS(gp_fit({uv({0.5})}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(gp_fit({}, {}), ShapeError);
    CHECK_THROWS_AS(gp_fit({uv({0.5})}, {std::nan("")}), DataError);
}

TEST_CASE("single point: standardization constants") {
    const auto m = gp_fit({uv({0.3, 0.7})}, {5.0});
    CHECK(m.target_mean == 5.0);
    CHECK(m.target_std == 1e-12); // clamped
}

TEST_CASE("duplicate inputs with equal targets fit via jitter") {
    const auto x = uv({0.4, 0.4});
    const auto m = gp_fit({x, x, x}, {1.0, 1.0, 1.0});
    CHECK(m.size() == 3);
    const auto pred = gp_predict(m, x);
    CHECK(pred.mu == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("factor reconstructs the kernel matrix within 1e-8") {
    const auto inputs = random_inputs(5, 3, 101);
    std::vector<double> targets{0.3, -1.2, 0.8, 2.4, -0.5};
    const auto m = gp_fit(inputs, targets);

    const auto n = inputs.size();
    // reconstruct L L^T and compare to a directly evaluated kernel matrix
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double rec = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                rec += m.chol[i + k * n] * m.chol[j + k * n]; // column-major
            }
            double r = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                const double diff = inputs[i].coords[d] - inputs[j].coords[d];
                r += diff * diff;
            }
            double exact = m.signal_variance *
                           oracle::matern52_ref(std::sqrt(r), m.lengthscale);
            if (i == j) exact += m.jitter;
            num += (rec - exact) * (rec - exact);
            den += exact * exact;
        }
    }
    CHECK(std::sqrt(num / den) < 1e-8);
}

TEST_CASE("predict at a training point interpolates") {
    const auto inputs = random_inputs(6, 2, 7);
    std::vector<double> targets{1.0, 2.0, 0.5, -1.0, 3.0, 1.5};
    const auto m = gp_fit(inputs, targets);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto pred = gp_predict(m, inputs[i]);
        CHECK(pred.mu == doctest::Approx(targets[i]).epsilon(1e-3));
        CHECK(pred.sigma <= 1e-2);
    }
}

TEST_CASE("predict far from data reverts to the prior") {
    const auto m = gp_fit({uv({0.5}), uv({0.52})}, {2.0, 2.4});
    // 10+ lengthscales away once warped distance saturates
    UnitVector far;
    far.coords = {0.5 + 100.0 * m.lengthscale};
    const auto pred = gp_predict(m, far);
    CHECK(pred.mu == doctest::Approx(m.target_mean).epsilon(1e-3));
    CHECK(pred.sigma ==
          doctest::Approx(std::sqrt(m.signal_variance) * m.target_std).epsilon(1e-3));
}

TEST_CASE("2-point symmetric query equals the dense-solve oracle") {
    const std::vector<double> x1{0.2, 0.5};
    const std::vector<double> x2{0.8, 0.5};
    const double y1 = 1.0, y2 = 3.0;
    const auto m = gp_fit({uv({0.2, 0.5}), uv({0.8, 0.5})}, {y1, y2});

    const std::vector<double> query{0.5, 0.9}; // equidistant from both
    const auto pred = gp_predict(m, uv({0.5, 0.9}));
    const double expect = oracle::two_point_posterior_mean(
        x1, x2, y1, y2, query, m.lengthscale, m.signal_variance, m.jitter);
    CHECK(pred.mu == doctest::Approx(expect).epsilon(1e-8));
    CHECK(pred.mu == doctest::Approx(0.5 * (y1 + y2)).epsilon(1e-8));
}

TEST_CASE("gp_predict rejects dimension mismatch") {
    const auto m = gp_fit({uv({0.5, 0.5})}, {1.0});
    CHECK_THROWS_AS(gp_predict(m, uv({0.5})), ShapeError);
}

TEST_CASE("expected improvement closed form") {
    // frozen values, cross-checked against the Monte-Carlo oracle below
    CHECK(expected_improvement(0.0, 1.0, 0.0) ==
          doctest::Approx(0.3989422804).epsilon(1e-6));
    CHECK(expected_improvement(-1.0, 1.0, 0.0) ==
          doctest::Approx(1.0833154712).epsilon(1e-6));
    CHECK(expected_improvement(1.0, 0.0, 0.0) == 0.0);
    CHECK(expected_improvement(-1.5, 0.0, 0.0) == 1.5);
    CHECK_THROWS_AS(expected_improvement(std::nan(""), 1.0, 0.0), DataError);
    CHECK_THROWS_AS(expected_improvement(0.0, -1.0, 0.0), DataError);
}

TEST_CASE("expected improvement matches Monte-Carlo at spot values") {
    // smaller sample count here; the acceptance suite runs the full grid
    const double tol = 3e-3;
    for (double mu : {-1.0, 0.0, 2.0}) {
        const double got = expected_improvement(mu, 1.0, 0.0);
        const double mc = oracle::mc_expected_improvement(mu, 1.0, 0.0, 2'000'000, 99);
        CHECK(std::abs(got - mc) < tol);
    }
}

TEST_CASE("EI is monotone nonincreasing in mu and dominates the no-variance payoff") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const double f_best = rng.uniform(-2.0, 2.0);
        const double sigma = rng.uniform(0.0, 3.0);
        const double mu1 = rng.uniform(-4.0, 4.0);
        const double mu2 = mu1 + rng.uniform(0.0, 2.0);
        const double e1 = expected_improvement(mu1, sigma, f_best);
        const double e2 = expected_improvement(mu2, sigma, f_best);
        CHECK(e1 >= e2 - 1e-12);
        CHECK(e1 >= std::max(f_best - mu1, 0.0) - 1e-12);
        CHECK(e1 >= 0.0);
    }
}

TEST_CASE("uncertainty grows away from the data") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inputs = random_inputs(4 + rng.uniform_below(6), 2, rng.fork());
        std::vector<double> targets;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            targets.push_back(rng.uniform(-1.0, 1.0));
        }
        const auto m = gp_fit(inputs, targets);
        UnitVector far;
        far.coords = {0.5 + 10.0 * m.lengthscale + 5.0, 0.5};
        const double sigma_far = gp_predict(m, far).sigma;
        for (const auto& x : inputs) {
            CHECK(gp_predict(m, x).sigma <= sigma_far + 1e-9);
        }
    }
}

TEST_CASE("constant targets give a constant posterior") {
    const auto inputs = random_inputs(5, 2, 33);
    const auto m = gp_fit(inputs, {4.2, 4.2, 4.2, 4.2, 4.2});
    Rng rng(55);
    for (int i = 0; i < 20; ++i) {
        UnitVector q;
        q.coords = {rng.uniform(), rng.uniform()};
        CHECK(gp_predict(m, q).mu == doctest::Approx(4.2).epsilon(1e-6));
    }
}

TEST_CASE("mle grid picks a lengthscale from the ladder") {
    const auto inputs = random_inputs(12, 2, 77);
    std::vector<double> targets;
    for (const auto& x : inputs) {
        targets.push_back(std::sin(6.0 * x.coords[0]) + x.coords[1]);
    }
    GpConfig cfg;
    cfg.mle_grid = true;
    const auto m = gp_fit(inputs, targets, cfg);
    const auto base = gp_fit(inputs, targets);
    bool on_ladder = false;
    for (double mult : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        if (m.lengthscale == doctest::Approx(base.lengthscale * mult)) {
            on_ladder = true;
        }
    }
    CHECK(on_ladder);
}
