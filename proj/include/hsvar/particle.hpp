#pragma once

#include "hsvar/random.hpp"
#include "hsvar/volatility.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace hsvar {

inline constexpr int kDefaultParticles = 100;

/// Observation density g_t(y_t | omega_t) seen by the particle filter.
class ObservationModel {
public:
    virtual ~ObservationModel() = default;
    virtual int dimension() const = 0;
    virtual int length() const = 0;
    /// out[j] = log g_t(y_t | particles.row(j)) for each particle row.
    virtual void log_density(int t, const Eigen::MatrixXd& particles, Eigen::VectorXd& out) const = 0;
};

/// eps_t ~ N(0, D_t Psi D_t), D_t = diag(exp(omega_t)); residuals are T x n.
class SvObservation final : public ObservationModel {
public:
    SvObservation(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& psi);

    int dimension() const override { return static_cast<int>(residuals_.cols()); }
    int length() const override { return static_cast<int>(residuals_.rows()); }
    void log_density(int t, const Eigen::MatrixXd& particles, Eigen::VectorXd& out) const override;

private:
    Eigen::MatrixXd residuals_;
    Eigen::MatrixXd psi_inverse_;
    double log_norm_ = 0.0;
};

/// Gaussian random-walk state dynamics with a Gaussian initial state.
struct RandomWalkPrior {
    Eigen::VectorXd init_mean;
    Eigen::VectorXd init_variance;
    Eigen::VectorXd step_sd;  // floored at kTauOmegaFloor

    static RandomWalkPrior from(const VolatilityState& vol);
};

/// Stored forward pass of the conditional auxiliary particle filter.
/// Slot N-1 holds the reference trajectory when one was supplied.
struct ParticleSystem {
    int N = 0;
    std::vector<Eigen::MatrixXd> particles;    // per t: N x n
    std::vector<Eigen::VectorXd> log_weights;  // per t: normalized, logsumexp = 0
    std::vector<Eigen::VectorXd> weights;      // per t: exp(log_weights)
    std::vector<Eigen::VectorXi> ancestors;    // per t: parent index at t-1 (identity at t=0)
    Eigen::MatrixXd reference;                 // n x T, empty when unconditional
    double log_likelihood = 0.0;               // APF estimate of log p(y_1:T)

    int T() const { return static_cast<int>(particles.size()); }
    bool conditional() const { return reference.size() > 0; }
};

/// Systematic resampling: N ancestor indices for normalized weights.
Eigen::VectorXi systematic_resample(const Eigen::VectorXd& weights, int N, Random& rng);

/// Systematic resampling conditioned on index `keep` being among the
/// offspring. Returns the N-1 other ancestors; the offset is drawn from its
/// exact conditional, which is proportional to the number of copies of
/// `keep` it produces.
Eigen::VectorXi conditional_systematic_resample(const Eigen::VectorXd& weights, int keep, Random& rng);

/// Conditional auxiliary particle filter. First-stage weights use the
/// random-walk predictive mean omega_{t-1}; particle N-1 is pinned to
/// `reference` (n x T) when provided. Throws NumericalError with the time
/// index if every weight underflows.
ParticleSystem capf_forward(const ObservationModel& observation, const RandomWalkPrior& prior,
                            const std::optional<Eigen::MatrixXd>& reference, int N, Random& rng);

/// Backward simulation through a stored forward pass; returns an n x T
/// trajectory.
Eigen::MatrixXd backward_simulate(const ParticleSystem& system, const RandomWalkPrior& prior, Random& rng);

/// Particle Gibbs with backward simulation for omega given residuals (T x n),
/// Psi and tau_omega. Uses vol.omega as the reference trajectory.
void pgbs_update(const Eigen::MatrixXd& residuals, VolatilityState& vol, int N, Random& rng);

} // namespace hsvar
