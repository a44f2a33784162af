#pragma once

#include "hsvar/random.hpp"
#include "hsvar/var_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>

namespace hsvar {

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kVarianceCap = 1e12;
inline constexpr int kKappaBins = 50;

/// Clamp prior variances into [kVarianceFloor, kVarianceCap] so the
/// posterior precision stays numerically positive definite.
Eigen::VectorXd clamp_variances(const Eigen::VectorXd& v);

/// Horseshoe latent state. Local scales are kept squared; nu and xi are the
/// inverse-gamma mixing variables of the half-Cauchy scale mixture
///   lambda^2 | nu ~ IG(1/2, 1/nu),  nu ~ IG(1/2, 1).
struct HorseshoeState {
    int n = 0;
    int lags = 0;
    Eigen::VectorXd lambda_sq;  // n*n*P, CoefTensor order
    Eigen::VectorXd nu;         // n*n*P
    Eigen::VectorXd tau_sq;     // n, one global scale per equation
    Eigen::VectorXd xi;         // n

    static HorseshoeState initial(int n, int lags);
    /// lambda^2_ijk * tau^2_i, clamped.
    Eigen::VectorXd prior_variances() const;
    void validate() const;
};

enum class ShrinkScheme { student_t, laplace, ridge };

std::string to_string(ShrinkScheme s);

struct ShrinkageHyper {
    double t_a = 0.5;           // lambda^2 ~ IG(a, b)
    double t_b = 0.5;
    double laplace_rate = 2.0;  // lambda^2 ~ Exp(rate)
    double ridge_variance = 9.0;
};

/// Per-coefficient prior variance lambda^2 for the Student-t, Laplace and
/// ridge schemes.
struct ScalarShrinkState {
    ShrinkScheme scheme = ShrinkScheme::ridge;
    ShrinkageHyper hyper;
    Eigen::VectorXd lambda_sq;

    static ScalarShrinkState initial(ShrinkScheme scheme, int n, int lags,
                                     const ShrinkageHyper& hyper = {});
    Eigen::VectorXd prior_variances() const { return clamp_variances(lambda_sq); }
    void validate() const;
};

/// kappa = 1 / (1 + lambda^2). Throws std::domain_error for negative or
/// non-finite lambda.
double kappa_from_lambda(double lambda);
double kappa_from_lambda_sq(double lambda_sq);

/// Posterior mean of mu in the normal-means model y ~ N(mu, 1),
/// mu ~ N(0, lambda^2): (1 - kappa) y.
double normal_means_oracle(double y, double lambda_sq);

/// One Gibbs pass over (lambda^2, nu) then (tau^2, xi) given theta.
void sample_horseshoe_scales(const CoefTensor& theta, HorseshoeState& state, Random& rng);

/// Draws (lambda^2, nu, tau^2, xi) from the horseshoe prior
/// (nu, xi ~ IG(1/2, 1); lambda^2 | nu ~ IG(1/2, 1/nu); tau^2 | xi ~ IG(1/2, 1/xi)).
HorseshoeState draw_horseshoe_prior(int n, int lags, Random& rng);

/// Student-t: lambda^2 | theta ~ IG(a + 1/2, b + theta^2/2).
/// Laplace: 1/lambda^2 | theta ~ InvGaussian(sqrt(2 rate)/|theta|, 2 rate).
/// Ridge: unchanged.
void sample_scalar_scales(const CoefTensor& theta, ScalarShrinkState& state, Random& rng);

/// Counts over kKappaBins equal bins of (0, 1]; bin b covers (b/50, (b+1)/50].
std::array<int, kKappaBins> kappa_histogram(std::span<const double> samples);

/// Midpoint of the fullest histogram bin; ties go to the bin nearer 1.
/// Requires at least 100 samples in (0, 1].
double map_kappa(std::span<const double> samples);

} // namespace hsvar
