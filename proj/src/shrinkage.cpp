#include "hsvar/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsvar {

namespace {

constexpr double kScaleFloor = 1e-12;
constexpr double kScaleCap = 1e12;

double clamp_scale(double v) { return std::clamp(v, kScaleFloor, kScaleCap); }

void require_finite(const CoefTensor& theta, const char* who) {
    if (!theta.flat().allFinite()) {
        throw std::domain_error(std::string(who) + ": non-finite coefficient");
    }
}

} // namespace

Eigen::VectorXd clamp_variances(const Eigen::VectorXd& v) {
    return v.cwiseMax(kVarianceFloor).cwiseMin(kVarianceCap);
}

HorseshoeState HorseshoeState::initial(int n, int lags) {
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n * lags;
    return HorseshoeState{n,
                          lags,
                          Eigen::VectorXd::Ones(size),
                          Eigen::VectorXd::Ones(size),
                          Eigen::VectorXd::Ones(n),
                          Eigen::VectorXd::Ones(n)};
}

Eigen::VectorXd HorseshoeState::prior_variances() const {
    const int width = n * lags;
    Eigen::VectorXd v(lambda_sq.size());
    for (int i = 0; i < n; ++i) {
        v.segment(static_cast<Eigen::Index>(i) * width, width) =
            lambda_sq.segment(static_cast<Eigen::Index>(i) * width, width) * tau_sq[i];
    }
    return clamp_variances(v);
}

void HorseshoeState::validate() const {
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n * lags;
    if (lambda_sq.size() != size || nu.size() != size || tau_sq.size() != n || xi.size() != n) {
        throw std::invalid_argument("HorseshoeState: inconsistent dimensions");
    }
    auto positive = [](const Eigen::VectorXd& v) { return v.allFinite() && (v.array() > 0.0).all(); };
    if (!positive(lambda_sq) || !positive(nu) || !positive(tau_sq) || !positive(xi)) {
        throw std::invalid_argument("HorseshoeState: entries must be positive and finite");
    }
}

std::string to_string(ShrinkScheme s) {
    switch (s) {
    case ShrinkScheme::student_t: return "t";
    case ShrinkScheme::laplace: return "lap";
    case ShrinkScheme::ridge: return "ridge";
    }
    throw std::invalid_argument("unknown shrinkage scheme");
}

ScalarShrinkState ScalarShrinkState::initial(ShrinkScheme scheme, int n, int lags,
                                             const ShrinkageHyper& hyper) {
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n * lags;
    ScalarShrinkState state{scheme, hyper, Eigen::VectorXd::Ones(size)};
    if (scheme == ShrinkScheme::ridge) {
        state.lambda_sq.setConstant(hyper.ridge_variance);
    }
    state.validate();
    return state;
}

void ScalarShrinkState::validate() const {
    if (!lambda_sq.allFinite() || (lambda_sq.array() <= 0.0).any()) {
        throw std::invalid_argument("ScalarShrinkState: lambda^2 must be positive and finite");
    }
    switch (scheme) {
    case ShrinkScheme::student_t:
        if (!(hyper.t_a > 0.0) || !(hyper.t_b > 0.0)) {
            throw std::invalid_argument("ScalarShrinkState: t prior needs a, b > 0");
        }
        break;
    case ShrinkScheme::laplace:
        if (!(hyper.laplace_rate > 0.0)) {
            throw std::invalid_argument("ScalarShrinkState: Laplace rate must be positive");
        }
        break;
    case ShrinkScheme::ridge:
        if (!(hyper.ridge_variance > 0.0)) {
            throw std::invalid_argument("ScalarShrinkState: ridge variance must be positive");
        }
        break;
    default:
        throw std::invalid_argument("ScalarShrinkState: unknown scheme");
    }
}

double kappa_from_lambda(double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::domain_error("kappa_from_lambda: lambda must be finite and non-negative");
    }
    return 1.0 / (1.0 + lambda * lambda);
}

double kappa_from_lambda_sq(double lambda_sq) {
    if (!std::isfinite(lambda_sq) || lambda_sq < 0.0) {
        throw std::domain_error("kappa_from_lambda_sq: lambda^2 must be finite and non-negative");
    }
    return 1.0 / (1.0 + lambda_sq);
}

double normal_means_oracle(double y, double lambda_sq) {
    if (!std::isfinite(y)) {
        throw std::domain_error("normal_means_oracle: y must be finite");
    }
    return (1.0 - kappa_from_lambda_sq(lambda_sq)) * y;
}

void sample_horseshoe_scales(const CoefTensor& theta, HorseshoeState& state, Random& rng) {
    require_finite(theta, "sample_horseshoe_scales");
    if (theta.n() != state.n || theta.lags() != state.lags) {
        throw std::invalid_argument("sample_horseshoe_scales: shape mismatch");
    }
    const int width = state.n * state.lags;
    const Eigen::VectorXd& th = theta.flat();
    for (int i = 0; i < state.n; ++i) {
        double weighted = 0.0;
        for (int m = i * width; m < (i + 1) * width; ++m) {
            const double half_sq = 0.5 * th[m] * th[m];
            state.lambda_sq[m] = clamp_scale(
                rng.inverse_gamma(1.0, 1.0 / state.nu[m] + half_sq / state.tau_sq[i]));
            state.nu[m] = clamp_scale(rng.inverse_gamma(1.0, 1.0 + 1.0 / state.lambda_sq[m]));
            weighted += half_sq / state.lambda_sq[m];
        }
        state.tau_sq[i] = clamp_scale(
            rng.inverse_gamma(0.5 * (width + 1), 1.0 / state.xi[i] + weighted));
        state.xi[i] = clamp_scale(rng.inverse_gamma(1.0, 1.0 + 1.0 / state.tau_sq[i]));
    }
}

HorseshoeState draw_horseshoe_prior(int n, int lags, Random& rng) {
    HorseshoeState s = HorseshoeState::initial(n, lags);
    for (Eigen::Index m = 0; m < s.lambda_sq.size(); ++m) {
        s.nu[m] = clamp_scale(rng.inverse_gamma(0.5, 1.0));
        s.lambda_sq[m] = clamp_scale(rng.inverse_gamma(0.5, 1.0 / s.nu[m]));
    }
    for (int i = 0; i < n; ++i) {
        s.xi[i] = clamp_scale(rng.inverse_gamma(0.5, 1.0));
        s.tau_sq[i] = clamp_scale(rng.inverse_gamma(0.5, 1.0 / s.xi[i]));
    }
    return s;
}

void sample_scalar_scales(const CoefTensor& theta, ScalarShrinkState& state, Random& rng) {
    require_finite(theta, "sample_scalar_scales");
    if (theta.size() != state.lambda_sq.size()) {
        throw std::invalid_argument("sample_scalar_scales: shape mismatch");
    }
    const Eigen::VectorXd& th = theta.flat();
    switch (state.scheme) {
    case ShrinkScheme::ridge:
        return;
    case ShrinkScheme::student_t:
        for (Eigen::Index m = 0; m < th.size(); ++m) {
            state.lambda_sq[m] = clamp_scale(
                rng.inverse_gamma(state.hyper.t_a + 0.5, state.hyper.t_b + 0.5 * th[m] * th[m]));
        }
        return;
    case ShrinkScheme::laplace: {
        const double shape = 2.0 * state.hyper.laplace_rate;
        for (Eigen::Index m = 0; m < th.size(); ++m) {
            const double abs_theta = std::abs(th[m]);
            const double mean = abs_theta > 0.0 ? std::sqrt(shape) / abs_theta
                                                : std::numeric_limits<double>::infinity();
            state.lambda_sq[m] = clamp_scale(1.0 / rng.inverse_gaussian(mean, shape));
        }
        return;
    }
    }
    throw std::invalid_argument("sample_scalar_scales: unknown scheme");
}

std::array<int, kKappaBins> kappa_histogram(std::span<const double> samples) {
    std::array<int, kKappaBins> counts{};
    for (double k : samples) {
        if (!(k > 0.0 && k <= 1.0)) {
            throw std::domain_error("kappa_histogram: sample outside (0, 1]");
        }
        // bin b covers (b/B, (b+1)/B]
        int b = static_cast<int>(std::ceil(k * kKappaBins)) - 1;
        counts[std::clamp(b, 0, kKappaBins - 1)] += 1;
    }
    return counts;
}

double map_kappa(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("map_kappa: no samples");
    }
    if (samples.size() < 100) {
        throw std::invalid_argument("map_kappa: need at least 100 samples");
    }
    const auto counts = kappa_histogram(samples);
    int best = kKappaBins - 1;
    for (int b = kKappaBins - 1; b >= 0; --b) {
        if (counts[b] > counts[best]) {
            best = b;
        }
    }
    return (best + 0.5) / kKappaBins;
}

} // namespace hsvar
