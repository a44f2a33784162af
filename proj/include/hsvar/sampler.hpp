#pragma once

#include "hsvar/chain_store.hpp"
#include "hsvar/discrete_mixture.hpp"
#include "hsvar/random.hpp"
#include "hsvar/shrinkage.hpp"
#include "hsvar/var_model.hpp"
#include "hsvar/volatility.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hsvar {

enum class Scheme { hs, dm, t, lap, ridge };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);
bool is_shrinkage(Scheme s);

/// Which Gibbs blocks run. Disabled blocks keep their current value.
struct UpdateMask {
    bool theta = true;
    bool latents = true;
    bool omega = true;
    bool psi = true;
    bool tau_omega = true;
};

struct SamplerConfig {
    Scheme scheme = Scheme::hs;
    int iterations = 15000;
    int burn_in = 5000;
    int thin = 1;
    int particles = 100;
    std::uint64_t seed = 1;
    int adapt_window = 50;

    ShrinkageHyper shrinkage;
    MixtureHyper mixture;
    double lkj_shape = 1.0;
    double init_mean = 0.0;
    double init_variance = 1.0;
    double initial_tau_omega = 0.1;
    double psi_step = 0.1;
    double tau_step = 0.5;

    /// Omega_t = I throughout: omega = 0, Psi = I, no volatility updates.
    bool fixed_volatility = false;
    UpdateMask updates;

    void validate() const;
    /// Number of frames a complete run stores.
    int frame_count() const { return (iterations - burn_in + thin - 1) / thin; }
};

using PriorLatents = std::variant<HorseshoeState, ScalarShrinkState, DiscreteMixtureState>;

/// Everything the Gibbs sampler updates.
struct ChainState {
    CoefTensor theta;  // for DM, delta .* beta
    PriorLatents latents;
    VolatilityState vol;
};

/// Random-walk Metropolis scales, adapted only during burn-in.
struct Tuning {
    double psi_step = 0.1;
    Eigen::VectorXd tau_steps;
    int psi_accepted = 0;
    Eigen::VectorXi tau_accepted;
    int window_count = 0;

    void reset_counts();
    /// Scale steps toward 20-40% acceptance over the last window.
    void adapt();
};

/// Component error carrying the iteration and the failing block.
class ChainError : public std::runtime_error {
public:
    ChainError(int iteration, std::string component, const std::string& what);
    int iteration() const { return iteration_; }
    const std::string& component() const { return component_; }

private:
    int iteration_;
    std::string component_;
};

/// Starting values carried from one rolling origin to the next.
struct WarmStart {
    ChainState state;
    double psi_step = 0.1;
    Eigen::VectorXd tau_steps;
};

/// theta <- OLS (zeros plus a warning when OLS is infeasible), delta <- 1,
/// beta <- OLS, omega <- iid N(0, 1), Psi <- I, tau_omega <- 0.1,
/// lambda, tau <- 1.
ChainState initialize(const RegressionData& data, const SamplerConfig& config, Random& rng);

/// One sweep: theta (or delta, beta), prior latents, omega, Psi, tau_omega.
void gibbs_sweep(const RegressionData& data, ChainState& state, const SamplerConfig& config,
                 Tuning& tuning, Random& rng);

FrameLayout frame_layout(Scheme scheme, int n, int lags, int T);
std::vector<double> make_frame(const ChainState& state, const FrameLayout& layout);

struct RunOptions {
    std::optional<WarmStart> warm_start;
    std::optional<std::filesystem::path> store_dir;
    std::vector<std::string> series_ids;
};

/// Full particle-Gibbs run. Identical config, data and warm start give a
/// byte-identical store. On a component failure the partial store is
/// flushed, marked incomplete, and the ChainError rethrown.
ChainStore run_chain(const RegressionData& data, const SamplerConfig& config,
                     const RunOptions& options = {});

/// Posterior means for theta, omega, tau_omega; medians for lambda/tau;
/// last draw for Psi. omega is extended to `next_T` columns by repeating
/// its final column.
WarmStart warm_start_from(const ChainStore& store, const SamplerConfig& config, int next_T);

/// Posterior summaries of a stored chain.
struct SummaryReport {
    std::string scheme;
    int n = 0;
    int lags = 0;
    int T = 0;
    std::size_t frames = 0;
    Eigen::VectorXd theta_mean;
    Eigen::VectorXd theta_q05, theta_q50, theta_q95;
    /// Shrinkage schemes: MAP of kappa = 1/(1+lambda^2) and 50-bin histograms.
    Eigen::VectorXd kappa_map;
    std::vector<std::array<int, kKappaBins>> kappa_histograms;
    /// Discrete mixture: posterior mean of delta.
    Eigen::VectorXd inclusion;
    Eigen::MatrixXd omega_q05, omega_q50, omega_q95;  // n x T
    Eigen::MatrixXd psi_mean;
    Eigen::VectorXd tau_omega_mean;
};

/// Requires at least 100 frames.
SummaryReport summarize(const ChainStore& store);

/// summary.json, coefficients.csv, kappa_histograms.csv (shrinkage
/// schemes) and volatility.csv into dir.
void write_summary(const SummaryReport& report, const std::filesystem::path& dir,
                   const std::vector<std::string>& series_ids = {});

} // namespace hsvar
