#pragma once

#include "hsvar/random.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hsvar {

inline constexpr double kTauOmegaFloor = 1e-8;
inline constexpr double kOmegaLimit = 300.0;

/// Stochastic-volatility state: Omega_t = D_t Psi D_t with
/// D_t = diag(exp(omega(., t))), random-walk log standard deviations
///   omega(i, t) = omega(i, t-1) + e,  e ~ N(0, tau_omega(i)^2),
/// and omega(i, 0) ~ N(init_mean, init_variance).
struct VolatilityState {
    Eigen::MatrixXd omega;      // n x T
    Eigen::MatrixXd psi;        // n x n correlation matrix
    Eigen::VectorXd tau_omega;  // n
    double init_mean = 0.0;
    double init_variance = 1.0;

    int n() const { return static_cast<int>(omega.rows()); }
    int T() const { return static_cast<int>(omega.cols()); }

    /// omega constant at log_sd, Psi = I, tau_omega = tau.
    static VolatilityState constant(int n, int T, double log_sd = 0.0, double tau = 0.1);
    void validate() const;
};

/// Omega_t for column t (0-based). Throws NumericalError when any
/// |omega(i, t)| exceeds kOmegaLimit.
Eigen::MatrixXd assemble_omega_t(const VolatilityState& vol, int t);

/// (m - 1) log det Psi, unnormalized. Throws std::domain_error unless Psi is
/// a positive-definite correlation matrix.
double lkj_log_density(const Eigen::MatrixXd& psi, double m);

/// True when psi is symmetric with unit diagonal and smallest eigenvalue
/// above 1e-10.
bool is_correlation_matrix(const Eigen::MatrixXd& psi);

/// Unconstrained coordinates of a correlation matrix: atanh of the canonical
/// partial correlations, column-major over the strict lower triangle.
Eigen::VectorXd correlation_to_unconstrained(const Eigen::MatrixXd& psi);

/// Inverse of correlation_to_unconstrained. When log_jacobian is given it
/// receives log |d Psi / d u| (tanh step plus the partial-correlation map).
Eigen::MatrixXd unconstrained_to_correlation(const Eigen::VectorXd& u, int n,
                                             double* log_jacobian = nullptr);

/// log N(eps_t; 0, Omega_t) summed over t as a function of Psi, for the
/// scaled residuals z_t = eps_t / exp(omega_t).
double psi_log_likelihood(const Eigen::MatrixXd& scaled_cross_product, int T,
                          const Eigen::MatrixXd& psi);

/// sum_t z_t z_t' with z_t = eps_t .* exp(-omega_t); residuals are T x n.
Eigen::MatrixXd scaled_cross_product(const Eigen::MatrixXd& residuals, const VolatilityState& vol);

/// One random-walk Metropolis step for Psi on the unconstrained
/// coordinates, targeting LKJ(m) x Gaussian likelihood. residuals is T x n
/// (T may be 0 for a prior-only target). Returns whether the move was
/// accepted; step_scale == 0 leaves Psi unchanged and reports acceptance.
bool sample_psi(const Eigen::MatrixXd& residuals, VolatilityState& vol, double m,
                double step_scale, Random& rng);

/// Per-series Metropolis step on log tau_omega(i), targeting the
/// half-Cauchy(0, 1) prior times the random-walk increment likelihood.
/// Proposals below kTauOmegaFloor are rejected. Returns acceptance flags.
std::vector<bool> sample_tau_omega(const Eigen::MatrixXd& omega, Eigen::VectorXd& tau_omega,
                                   const Eigen::VectorXd& step_scales, Random& rng);

/// Log posterior density of log tau for one series (up to a constant).
double tau_omega_log_target(double log_tau, double increment_ss, int increments);

} // namespace hsvar
