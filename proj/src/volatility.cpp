#include "hsvar/volatility.hpp"

#include "hsvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsvar {

namespace {

constexpr double kCpcLimit = 1.0 - 1e-12;

} // namespace

VolatilityState VolatilityState::constant(int n, int T, double log_sd, double tau) {
    VolatilityState vol;
    vol.omega = Eigen::MatrixXd::Constant(n, T, log_sd);
    vol.psi = Eigen::MatrixXd::Identity(n, n);
    vol.tau_omega = Eigen::VectorXd::Constant(n, tau);
    return vol;
}

void VolatilityState::validate() const {
    const int dim = n();
    if (psi.rows() != dim || psi.cols() != dim || tau_omega.size() != dim) {
        throw std::invalid_argument("VolatilityState: inconsistent dimensions");
    }
    if (!omega.allFinite()) {
        throw std::invalid_argument("VolatilityState: omega must be finite");
    }
    if (!tau_omega.allFinite() || (tau_omega.array() <= 0.0).any()) {
        throw std::invalid_argument("VolatilityState: tau_omega must be positive");
    }
    if (!is_correlation_matrix(psi)) {
        throw std::invalid_argument("VolatilityState: psi is not a valid correlation matrix");
    }
    if (!(init_variance > 0.0)) {
        throw std::invalid_argument("VolatilityState: initial-state variance must be positive");
    }
}

Eigen::MatrixXd assemble_omega_t(const VolatilityState& vol, int t) {
    if (t < 0 || t >= vol.T()) {
        throw std::out_of_range("assemble_omega_t: time index " + std::to_string(t) + " out of range");
    }
    const Eigen::VectorXd w = vol.omega.col(t);
    if ((w.array().abs() > kOmegaLimit).any()) {
        throw NumericalError("assemble_omega_t: |omega| exceeds " + std::to_string(kOmegaLimit) +
                                 " at t=" + std::to_string(t),
                             t);
    }
    const Eigen::VectorXd d = w.array().exp();
    return d.asDiagonal() * vol.psi * d.asDiagonal();
}

bool is_correlation_matrix(const Eigen::MatrixXd& psi) {
    if (psi.rows() != psi.cols() || psi.rows() == 0 || !psi.allFinite()) {
        return false;
    }
    if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        return false;
    }
    if ((psi.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psi, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() > 1e-10;
}

double lkj_log_density(const Eigen::MatrixXd& psi, double m) {
    if (!(m > 0.0)) {
        throw std::domain_error("lkj_log_density: shape m must be positive");
    }
    if (!is_correlation_matrix(psi)) {
        throw std::domain_error("lkj_log_density: not a positive-definite correlation matrix");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(psi);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return (m - 1.0) * log_det;
}

Eigen::VectorXd correlation_to_unconstrained(const Eigen::MatrixXd& psi) {
    const auto n = static_cast<int>(psi.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(psi);
    if (llt.info() != Eigen::Success) {
        throw std::domain_error("correlation_to_unconstrained: matrix is not positive definite");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd cpc = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double remaining = 1.0;
        for (int j = 0; j < i; ++j) {
            const double z = L(i, j) / std::sqrt(remaining);
            cpc(i, j) = std::clamp(z, -kCpcLimit, kCpcLimit);
            remaining -= L(i, j) * L(i, j);
        }
    }
    Eigen::VectorXd u(n * (n - 1) / 2);
    int pos = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = j + 1; i < n; ++i) {
            u[pos++] = std::atanh(cpc(i, j));
        }
    }
    return u;
}

Eigen::MatrixXd unconstrained_to_correlation(const Eigen::VectorXd& u, int n, double* log_jacobian) {
    if (u.size() != n * (n - 1) / 2) {
        throw std::invalid_argument("unconstrained_to_correlation: wrong number of coordinates");
    }
    Eigen::MatrixXd cpc = Eigen::MatrixXd::Zero(n, n);
    double log_j = 0.0;
    int pos = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = j + 1; i < n; ++i) {
            const double z = std::clamp(std::tanh(u[pos++]), -kCpcLimit, kCpcLimit);
            cpc(i, j) = z;
            const double log1mz2 = std::log1p(-z * z);
            // tanh derivative, then the partial-correlation -> correlation map
            log_j += log1mz2 + 0.5 * static_cast<double>(n - j - 2) * log1mz2;
        }
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    L(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        double remaining = 1.0;
        for (int j = 0; j < i; ++j) {
            L(i, j) = cpc(i, j) * std::sqrt(remaining);
            remaining -= L(i, j) * L(i, j);
        }
        L(i, i) = std::sqrt(std::max(remaining, 0.0));
    }
    Eigen::MatrixXd psi = L * L.transpose();
    psi.diagonal().setOnes();
    psi = 0.5 * (psi + psi.transpose());
    if (log_jacobian != nullptr) {
        *log_jacobian = log_j;
    }
    return psi;
}

Eigen::MatrixXd scaled_cross_product(const Eigen::MatrixXd& residuals, const VolatilityState& vol) {
    if (residuals.rows() == 0) {
        return Eigen::MatrixXd::Zero(vol.n(), vol.n());
    }
    if (residuals.rows() != vol.T() || residuals.cols() != vol.n()) {
        throw std::invalid_argument("scaled_cross_product: residuals do not match volatility state");
    }
    const Eigen::MatrixXd z = residuals.array() * (-vol.omega.transpose().array()).exp();
    return z.transpose() * z;
}

double psi_log_likelihood(const Eigen::MatrixXd& scaled_cross_product, int T, const Eigen::MatrixXd& psi) {
    if (T == 0) {
        return 0.0;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(psi);
    if (llt.info() != Eigen::Success) {
        return -std::numeric_limits<double>::infinity();
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const double trace = llt.solve(scaled_cross_product).trace();
    return -0.5 * T * log_det - 0.5 * trace;
}

bool sample_psi(const Eigen::MatrixXd& residuals, VolatilityState& vol, double m,
                double step_scale, Random& rng) {
    const int n = vol.n();
    if (step_scale == 0.0 || n < 2) {
        return true;
    }
    const auto T = static_cast<int>(residuals.rows());
    const Eigen::MatrixXd S = scaled_cross_product(residuals, vol);

    auto log_target = [&](const Eigen::VectorXd& u, Eigen::MatrixXd& psi) {
        double log_j = 0.0;
        psi = unconstrained_to_correlation(u, n, &log_j);
        if (!is_correlation_matrix(psi)) {
            return -std::numeric_limits<double>::infinity();
        }
        return psi_log_likelihood(S, T, psi) + lkj_log_density(psi, m) + log_j;
    };

    const Eigen::VectorXd u = correlation_to_unconstrained(vol.psi);
    Eigen::VectorXd proposal(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        proposal[k] = u[k] + step_scale * rng.normal();
    }
    Eigen::MatrixXd psi_current;
    Eigen::MatrixXd psi_proposed;
    const double current = log_target(u, psi_current);
    const double proposed = log_target(proposal, psi_proposed);
    if (std::isnan(current) || std::isnan(proposed)) {
        throw NumericalError("sample_psi: non-finite acceptance ratio");
    }
    if (proposed == -std::numeric_limits<double>::infinity()) {
        return false;
    }
    if (std::log(rng.uniform()) < proposed - current) {
        vol.psi = psi_proposed;
        return true;
    }
    return false;
}

double tau_omega_log_target(double log_tau, double increment_ss, int increments) {
    const double tau = std::exp(log_tau);
    return std::log(2.0 / std::numbers::pi) - std::log1p(tau * tau) + log_tau
           - increments * log_tau - 0.5 * increment_ss / (tau * tau);
}

std::vector<bool> sample_tau_omega(const Eigen::MatrixXd& omega, Eigen::VectorXd& tau_omega,
                                   const Eigen::VectorXd& step_scales, Random& rng) {
    const auto n = static_cast<int>(omega.rows());
    const auto T = static_cast<int>(omega.cols());
    if (tau_omega.size() != n || step_scales.size() != n) {
        throw std::invalid_argument("sample_tau_omega: dimension mismatch");
    }
    std::vector<bool> accepted(n, false);
    const double log_floor = std::log(kTauOmegaFloor);
    for (int i = 0; i < n; ++i) {
        if (step_scales[i] == 0.0) {
            accepted[i] = true;
            continue;
        }
        double ss = 0.0;
        for (int t = 1; t < T; ++t) {
            const double d = omega(i, t) - omega(i, t - 1);
            ss += d * d;
        }
        const double current = std::log(std::max(tau_omega[i], kTauOmegaFloor));
        const double proposal = current + step_scales[i] * rng.normal();
        const double u = rng.uniform();
        if (proposal < log_floor) {
            continue;
        }
        const double ratio = tau_omega_log_target(proposal, ss, T - 1) -
                             tau_omega_log_target(current, ss, T - 1);
        if (std::isnan(ratio)) {
            throw NumericalError("sample_tau_omega: non-finite target for series " + std::to_string(i));
        }
        if (std::log(u) < ratio) {
            tau_omega[i] = std::exp(proposal);
            accepted[i] = true;
        }
    }
    return accepted;
}

} // namespace hsvar
