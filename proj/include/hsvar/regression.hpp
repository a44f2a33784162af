#pragma once

#include "hsvar/random.hpp"
#include "hsvar/var_model.hpp"
#include "hsvar/volatility.hpp"

#include <Eigen/Dense>

namespace hsvar {

/// Gaussian likelihood of the stacked coefficient vector given Omega_1..T:
///   log p(Y | theta) = -1/2 theta' precision theta + theta' linear + const,
/// with precision = sum_t Omega_t^{-1} (x) x_t x_t' in CoefTensor order.
struct GaussianLikelihood {
    Eigen::MatrixXd precision;
    Eigen::VectorXd linear;
};

GaussianLikelihood theta_likelihood(const RegressionData& data, const VolatilityState& vol);

/// Posterior N(mean, precision^{-1}) for prior theta ~ N(0, diag(prior_variances)).
struct GaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd precision;
};

GaussianPosterior theta_posterior(const GaussianLikelihood& likelihood,
                                  const Eigen::VectorXd& prior_variances);

/// One exact draw from N(mean, precision^{-1}) through the Cholesky factor of
/// the precision. Throws NumericalError when the precision is not PD.
Eigen::VectorXd sample_gaussian_from_precision(const Eigen::MatrixXd& precision,
                                               const Eigen::VectorXd& linear, Random& rng);

/// Joint draw of all n*n*P coefficients from their full conditional.
/// Prior variances are clamped to [1e-12, 1e12].
CoefTensor sample_theta(const RegressionData& data, const Eigen::VectorXd& prior_variances,
                        const VolatilityState& vol, Random& rng);

/// Residuals Y - X Theta' (T x n).
Eigen::MatrixXd residuals(const RegressionData& data, const CoefTensor& theta);

} // namespace hsvar
