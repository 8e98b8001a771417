#include "bbo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

constexpr double kSqrt5 = 2.23606797749978969;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double distance(const UnitVector& a, const UnitVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
        const double d = a.coords[i] - b.coords[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Median pairwise distance among inputs; 1.0 when degenerate.
double median_heuristic(const std::vector<UnitVector>& inputs) {
    std::vector<double> dists;
    dists.reserve(inputs.size() * (inputs.size() - 1) / 2);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = i + 1; j < inputs.size(); ++j) {
            dists.push_back(distance(inputs[i], inputs[j]));
        }
    }
    if (dists.empty()) return 1.0;
    std::sort(dists.begin(), dists.end());
    const double med = dists[dists.size() / 2];
    return med > 1e-6 ? med : 1.0;
}

Eigen::MatrixXd kernel_matrix(const std::vector<UnitVector>& inputs, double ell,
                              double signal_variance) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = signal_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = signal_variance *
                             matern52(distance(inputs[i], inputs[j]), ell);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

struct Factorized {
    Eigen::MatrixXd chol; // lower
    double jitter;
};

/// Cholesky with the jitter escalation ladder 1e-6 -> 1e-2 (x10 steps).
Factorized factorize(const Eigen::MatrixXd& k, double jitter0) {
    double jitter = jitter0;
    while (true) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            return {Eigen::MatrixXd(llt.matrixL()), jitter};
        }
        if (jitter >= 1e-2) {
            throw NumericalError(
                "gp_fit: factorization failed with jitter up to 1e-2");
        }
        jitter *= 10.0;
    }
}

/// log p(y | X, ell) up to the constant term, for the MLE grid.
double log_marginal(const Eigen::MatrixXd& chol, const Eigen::VectorXd& alpha,
                    const Eigen::VectorXd& y) {
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < chol.rows(); ++i) {
        logdet += std::log(chol(i, i));
    }
    return -0.5 * y.dot(alpha) - logdet;
}

} // namespace

double matern52(double r, double ell) {
    const double z = kSqrt5 * r / ell;
    return (1.0 + z + z * z / 3.0) * std::exp(-z);
}

GpModel gp_fit(const std::vector<UnitVector>& inputs, const std::vector<double>& targets,
               const GpConfig& cfg) {
    if (inputs.size() != targets.size()) {
        throw ShapeError("gp_fit: " + std::to_string(inputs.size()) + " inputs vs " +
                         std::to_string(targets.size()) + " targets");
    }
    if (inputs.empty()) {
        throw ShapeError("gp_fit: needs at least one observation");
    }
    for (double t : targets) {
        if (!std::isfinite(t)) throw DataError("gp_fit: non-finite target");
    }

    GpModel m;
    m.inputs = inputs;
    m.signal_variance = cfg.signal_variance;

    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = targets[i];

    if (cfg.standardize_targets) {
        m.target_mean = y.mean();
        const double var = (y.array() - m.target_mean).square().sum() /
                           static_cast<double>(n);
        m.target_std = std::max(std::sqrt(var), 1e-12);
        y = (y.array() - m.target_mean) / m.target_std;
    }

    const double base_ell =
        cfg.lengthscale > 0.0 ? cfg.lengthscale : median_heuristic(inputs);

    std::vector<double> ladder{1.0};
    if (cfg.mle_grid && cfg.lengthscale <= 0.0) {
        ladder = {0.25, 0.5, 1.0, 2.0, 4.0};
    }

    double best_score = -std::numeric_limits<double>::infinity();
    for (double mult : ladder) {
        const double ell = base_ell * mult;
        const auto fac =
            factorize(kernel_matrix(inputs, ell, cfg.signal_variance), cfg.noise_jitter);
        Eigen::VectorXd alpha =
            fac.chol.transpose().triangularView<Eigen::Upper>().solve(
                fac.chol.triangularView<Eigen::Lower>().solve(y));
        const double score =
            ladder.size() == 1 ? 0.0 : log_marginal(fac.chol, alpha, y);
        if (score > best_score) {
            best_score = score;
            m.lengthscale = ell;
            m.jitter = fac.jitter;
            m.chol.assign(fac.chol.data(), fac.chol.data() + fac.chol.size());
            m.alpha.assign(alpha.data(), alpha.data() + alpha.size());
        }
    }

    m.targets_std.assign(y.data(), y.data() + y.size());
    return m;
}

GpPrediction gp_predict(const GpModel& model, const UnitVector& x) {
    if (x.coords.size() != model.dim()) {
        throw ShapeError("gp_predict: query has " + std::to_string(x.coords.size()) +
                         " dims, model has " + std::to_string(model.dim()));
    }
    const auto n = static_cast<Eigen::Index>(model.size());
    Eigen::Map<const Eigen::MatrixXd> chol(model.chol.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> alpha(model.alpha.data(), n);

    Eigen::VectorXd kstar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kstar(i) = model.signal_variance *
                   matern52(distance(model.inputs[i], x), model.lengthscale);
    }

    const double mu_std = kstar.dot(alpha);
    const Eigen::VectorXd v = chol.triangularView<Eigen::Lower>().solve(kstar);
    const double var_std = std::max(model.signal_variance - v.squaredNorm(), 0.0);

    return {mu_std * model.target_std + model.target_mean,
            std::sqrt(var_std) * model.target_std};
}

double expected_improvement(double mu, double sigma, double f_best) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(f_best)) {
        throw DataError("expected_improvement: non-finite input");
    }
    if (sigma < 0.0) throw DataError("expected_improvement: negative sigma");
    const double gap = f_best - mu;
    if (sigma == 0.0) return std::max(gap, 0.0);
    const double z = gap / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    return std::max(gap * cdf + sigma * pdf, 0.0);
}

} // namespace bbo
