#pragma once

#include "hsvar/random.hpp"
#include "hsvar/var_model.hpp"
#include "hsvar/volatility.hpp"

#include <Eigen/Dense>

#include <span>

namespace hsvar {

struct MixtureHyper {
    double a = 1.0;  // pi_i ~ Beta(a, b)
    double b = 1.0;
    double slab_variance = 9.0;  // beta ~ N(0, c^2)
};

/// Spike-and-slab state: theta = delta .* beta, delta ~ Bernoulli(1 - pi_i)
/// within equation i, so pi_i is the exclusion probability.
struct DiscreteMixtureState {
    int n = 0;
    int lags = 0;
    Eigen::VectorXi delta;  // 0/1, CoefTensor order
    Eigen::VectorXd beta;
    Eigen::VectorXd pi;     // n
    MixtureHyper hyper;

    /// delta = 1, beta = given (or zero), pi = 1/2.
    static DiscreteMixtureState initial(int n, int lags, const MixtureHyper& hyper = {});
    void validate() const;
};

CoefTensor effective_theta(const DiscreteMixtureState& state);

/// Lexicographic sweep drawing each delta from its Bernoulli full
/// conditional given beta and the other indicators, using cached
/// Omega-weighted residuals.
void sample_delta(const RegressionData& data, DiscreteMixtureState& state,
                  const VolatilityState& vol, Random& rng);

/// Included slab coefficients drawn jointly from their Gaussian full
/// conditional; excluded ones refreshed from N(0, c^2).
void sample_beta(const RegressionData& data, DiscreteMixtureState& state,
                 const VolatilityState& vol, Random& rng);

/// pi_i ~ Beta(a + #excluded_i, b + #included_i).
void sample_pi(DiscreteMixtureState& state, Random& rng);

/// Elementwise mean of indicator draws.
Eigen::VectorXd inclusion_probability(std::span<const Eigen::VectorXi> delta_samples);

} // namespace hsvar
