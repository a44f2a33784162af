#include "hsvar/discrete_mixture.hpp"

#include "hsvar/errors.hpp"
#include "hsvar/regression.hpp"
#include "hsvar/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsvar {

namespace {

constexpr double kPiClamp = 1e-12;

double clamp_pi(double p) { return std::clamp(p, kPiClamp, 1.0 - kPiClamp); }

} // namespace

DiscreteMixtureState DiscreteMixtureState::initial(int n, int lags, const MixtureHyper& hyper) {
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n * lags;
    DiscreteMixtureState state{n,
                               lags,
                               Eigen::VectorXi::Ones(size),
                               Eigen::VectorXd::Zero(size),
                               Eigen::VectorXd::Constant(n, 0.5),
                               hyper};
    state.validate();
    return state;
}

void DiscreteMixtureState::validate() const {
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n * lags;
    if (delta.size() != size || beta.size() != size || pi.size() != n) {
        throw std::invalid_argument("DiscreteMixtureState: inconsistent dimensions");
    }
    if (((delta.array() != 0) && (delta.array() != 1)).any()) {
        throw std::invalid_argument("DiscreteMixtureState: delta must be 0 or 1");
    }
    if (!beta.allFinite()) {
        throw std::invalid_argument("DiscreteMixtureState: beta must be finite");
    }
    if ((pi.array() <= 0.0).any() || (pi.array() >= 1.0).any()) {
        throw std::invalid_argument("DiscreteMixtureState: pi must lie in (0, 1)");
    }
    if (!(hyper.a > 0.0) || !(hyper.b > 0.0) || !(hyper.slab_variance > 0.0)) {
        throw std::invalid_argument("DiscreteMixtureState: hyperparameters must be positive");
    }
}

CoefTensor effective_theta(const DiscreteMixtureState& state) {
    if (state.delta.size() != state.beta.size()) {
        throw std::invalid_argument("effective_theta: shape mismatch");
    }
    return CoefTensor(state.n, state.lags, state.beta.cwiseProduct(state.delta.cast<double>()));
}

void sample_delta(const RegressionData& data, DiscreteMixtureState& state,
                  const VolatilityState& vol, Random& rng) {
    const int n = state.n;
    const int lags = state.lags;
    const int width = n * lags;
    const int T = data.shape.T;
    if (data.shape.n != n || data.shape.lags != lags || vol.T() != T || vol.n() != n) {
        throw std::invalid_argument("sample_delta: dimension mismatch");
    }
    Eigen::LLT<Eigen::MatrixXd> psi_llt(vol.psi);
    if (psi_llt.info() != Eigen::Success) {
        throw NumericalError("sample_delta: psi is not positive definite");
    }
    const Eigen::MatrixXd psi_inv = psi_llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd inv_sd = (-vol.omega.transpose().array()).exp();  // T x n

    // e_t and r_t = Omega_t^{-1} e_t, both T x n
    Eigen::MatrixXd resid = residuals(data, effective_theta(state));
    Eigen::MatrixXd weighted = (resid.cwiseProduct(inv_sd) * psi_inv).cwiseProduct(inv_sd);

    Eigen::VectorXd omega_ii(T);
    for (int i = 0; i < n; ++i) {
        const double prior_log_odds =
            std::log1p(-clamp_pi(state.pi[i])) - std::log(clamp_pi(state.pi[i]));
        // (Omega_t^{-1})_{ii}
        omega_ii = psi_inv(i, i) * inv_sd.col(i).array().square();
        for (int c = 0; c < width; ++c) {
            const int m = i * width + c;
            const double b = state.beta[m];
            const auto x = data.X.col(c);
            const double cross = x.dot(weighted.col(i));
            const double quad = x.cwiseAbs2().dot(omega_ii);
            // SSE(delta=1) - SSE(delta=0), evaluated from the current residuals
            const double sse_diff = state.delta[m] == 1 ? -(2.0 * b * cross + b * b * quad)
                                                        : -2.0 * b * cross + b * b * quad;
            const double log_odds = prior_log_odds - 0.5 * sse_diff;
            if (std::isnan(log_odds)) {
                throw NumericalError("sample_delta: non-finite likelihood for coefficient " +
                                     std::to_string(m));
            }
            const double p_include = 1.0 / (1.0 + std::exp(-log_odds));
            const int draw = rng.uniform() < p_include ? 1 : 0;
            if (draw != state.delta[m]) {
                // theta_m moves from (1 - draw) * b to draw * b
                const double change = draw == 1 ? b : -b;
                resid.col(i) -= change * x;
                for (int k = 0; k < n; ++k) {
                    if (psi_inv(k, i) != 0.0) {
                        weighted.col(k).array() -= change * psi_inv(k, i) *
                                                   (x.array() * inv_sd.col(k).array() *
                                                    inv_sd.col(i).array());
                    }
                }
                state.delta[m] = draw;
            }
        }
    }
}

void sample_beta(const RegressionData& data, DiscreteMixtureState& state,
                 const VolatilityState& vol, Random& rng) {
    const double slab = std::max(state.hyper.slab_variance, kVarianceFloor);
    std::vector<int> included;
    for (Eigen::Index m = 0; m < state.delta.size(); ++m) {
        if (state.delta[m] == 1) {
            included.push_back(static_cast<int>(m));
        } else {
            state.beta[m] = std::sqrt(slab) * rng.normal();
        }
    }
    if (included.empty()) {
        return;
    }
    const GaussianLikelihood lik = theta_likelihood(data, vol);
    const auto k = static_cast<Eigen::Index>(included.size());
    Eigen::MatrixXd precision(k, k);
    Eigen::VectorXd linear(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        linear[a] = lik.linear[included[a]];
        for (Eigen::Index b = 0; b < k; ++b) {
            precision(a, b) = lik.precision(included[a], included[b]);
        }
        precision(a, a) += 1.0 / slab;
    }
    const Eigen::VectorXd draw = sample_gaussian_from_precision(precision, linear, rng);
    for (Eigen::Index a = 0; a < k; ++a) {
        state.beta[included[a]] = draw[a];
    }
}

void sample_pi(DiscreteMixtureState& state, Random& rng) {
    const int width = state.n * state.lags;
    for (int i = 0; i < state.n; ++i) {
        const int included = state.delta.segment(static_cast<Eigen::Index>(i) * width, width).sum();
        const int excluded = width - included;
        state.pi[i] = clamp_pi(rng.beta(state.hyper.a + excluded, state.hyper.b + included));
    }
}

Eigen::VectorXd inclusion_probability(std::span<const Eigen::VectorXi> delta_samples) {
    if (delta_samples.empty()) {
        throw std::invalid_argument("inclusion_probability: no samples");
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(delta_samples.front().size());
    for (const auto& d : delta_samples) {
        if (d.size() != total.size()) {
            throw std::invalid_argument("inclusion_probability: samples differ in size");
        }
        total += d.cast<double>();
    }
    return total / static_cast<double>(delta_samples.size());
}

} // namespace hsvar
