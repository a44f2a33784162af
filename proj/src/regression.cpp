#include "hsvar/regression.hpp"

#include "hsvar/errors.hpp"
#include "hsvar/shrinkage.hpp"

#include <stdexcept>

namespace hsvar {

GaussianLikelihood theta_likelihood(const RegressionData& data, const VolatilityState& vol) {
    const int n = data.shape.n;
    const int width = data.shape.coefficients_per_equation();
    const int T = data.shape.T;
    if (vol.n() != n || vol.T() != T) {
        throw std::invalid_argument("theta_likelihood: volatility state does not match data");
    }
    if ((vol.omega.array().abs() > kOmegaLimit).any()) {
        throw NumericalError("theta_likelihood: |omega| exceeds overflow limit");
    }
    Eigen::LLT<Eigen::MatrixXd> psi_llt(vol.psi);
    if (psi_llt.info() != Eigen::Success) {
        throw NumericalError("theta_likelihood: psi is not positive definite");
    }
    const Eigen::MatrixXd psi_inv = psi_llt.solve(Eigen::MatrixXd::Identity(n, n));

    // inv_sd(t, i) = exp(-omega(i, t)); Omega_t^{-1} = D^{-1} Psi^{-1} D^{-1}
    const Eigen::MatrixXd inv_sd = (-vol.omega.transpose().array()).exp();
    std::vector<Eigen::MatrixXd> scaled(n);
    for (int i = 0; i < n; ++i) {
        scaled[i] = data.X.array().colwise() * inv_sd.col(i).array();
    }
    const Eigen::MatrixXd z = data.Y.cwiseProduct(inv_sd) * psi_inv;

    GaussianLikelihood lik;
    lik.precision = Eigen::MatrixXd::Zero(n * width, n * width);
    lik.linear.resize(n * width);
    for (int i = 0; i < n; ++i) {
        for (int k = i; k < n; ++k) {
            if (psi_inv(i, k) == 0.0) {
                continue;
            }
            const Eigen::MatrixXd block = psi_inv(i, k) * (scaled[i].transpose() * scaled[k]);
            lik.precision.block(i * width, k * width, width, width) = block;
            if (k != i) {
                lik.precision.block(k * width, i * width, width, width) = block.transpose();
            }
        }
        lik.linear.segment(i * width, width) = scaled[i].transpose() * z.col(i);
    }
    return lik;
}

GaussianPosterior theta_posterior(const GaussianLikelihood& likelihood,
                                  const Eigen::VectorXd& prior_variances) {
    if (prior_variances.size() != likelihood.linear.size()) {
        throw std::invalid_argument("theta_posterior: prior variance length mismatch");
    }
    GaussianPosterior post;
    post.precision = likelihood.precision;
    post.precision.diagonal() += clamp_variances(prior_variances).cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("theta_posterior: posterior precision is not positive definite");
    }
    post.mean = llt.solve(likelihood.linear);
    return post;
}

Eigen::VectorXd sample_gaussian_from_precision(const Eigen::MatrixXd& precision,
                                               const Eigen::VectorXd& linear, Random& rng) {
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("posterior precision is not positive definite");
    }
    Eigen::VectorXd z(linear.size());
    for (Eigen::Index m = 0; m < z.size(); ++m) {
        z[m] = rng.normal();
    }
    Eigen::VectorXd draw = llt.solve(linear);
    draw += llt.matrixU().solve(z);
    if (!draw.allFinite()) {
        throw NumericalError("non-finite Gaussian draw");
    }
    return draw;
}

CoefTensor sample_theta(const RegressionData& data, const Eigen::VectorXd& prior_variances,
                        const VolatilityState& vol, Random& rng) {
    if (prior_variances.size() != data.shape.coefficient_count()) {
        throw std::invalid_argument("sample_theta: prior variance length mismatch");
    }
    // zero is the dogmatic limit and gets floored with everything else
    if ((prior_variances.array() < 0.0).any() || prior_variances.hasNaN()) {
        throw std::invalid_argument("sample_theta: prior variances must be non-negative");
    }
    GaussianLikelihood lik = theta_likelihood(data, vol);
    lik.precision.diagonal() += clamp_variances(prior_variances).cwiseInverse();
    return CoefTensor(data.shape.n, data.shape.lags,
                      sample_gaussian_from_precision(lik.precision, lik.linear, rng));
}

Eigen::MatrixXd residuals(const RegressionData& data, const CoefTensor& theta) {
    return data.Y - data.X * theta.as_matrix().transpose();
}

} // namespace hsvar
