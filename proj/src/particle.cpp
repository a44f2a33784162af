#include "hsvar/particle.hpp"

#include "hsvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& x) {
    const double mx = x.maxCoeff();
    if (mx == kNegInf || std::isnan(mx)) {
        return kNegInf;
    }
    return mx + std::log((x.array() - mx).exp().sum());
}

/// Normalizes log weights in place; returns the log of the unnormalized sum.
double normalize(Eigen::VectorXd& log_w, int t) {
    const double lse = log_sum_exp(log_w);
    if (!std::isfinite(lse)) {
        throw NumericalError("particle weights underflowed at t=" + std::to_string(t), t);
    }
    log_w.array() -= lse;
    return lse;
}

int sample_index(const Eigen::VectorXd& log_w, Random& rng) {
    const double mx = log_w.maxCoeff();
    if (!std::isfinite(mx)) {
        throw NumericalError("backward simulation weights underflowed");
    }
    const Eigen::VectorXd w = (log_w.array() - mx).exp();
    const double u = rng.uniform() * w.sum();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        acc += w[j];
        if (u < acc) {
            return static_cast<int>(j);
        }
    }
    // u landed on the rounding slack; take the last positive weight
    for (Eigen::Index j = w.size() - 1; j >= 0; --j) {
        if (w[j] > 0.0) {
            return static_cast<int>(j);
        }
    }
    return static_cast<int>(w.size() - 1);
}

std::vector<double> cumulative(const Eigen::VectorXd& weights) {
    std::vector<double> cum(static_cast<std::size_t>(weights.size()));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        acc += weights[j];
        cum[static_cast<std::size_t>(j)] = acc;
    }
    return cum;
}

/// Indices of the points (n + u)/N, n = 0..N-1, under the cumulative weights.
Eigen::VectorXi systematic_with_offset(const std::vector<double>& cum, int N, double u) {
    Eigen::VectorXi idx(N);
    const double total = cum.back();
    std::size_t j = 0;
    for (int k = 0; k < N; ++k) {
        const double pos = (k + u) / N * total;
        while (j + 1 < cum.size() && pos >= cum[j]) {
            ++j;
        }
        idx[k] = static_cast<int>(j);
    }
    return idx;
}

} // namespace

SvObservation::SvObservation(const Eigen::MatrixXd& residuals, const Eigen::MatrixXd& psi)
    : residuals_(residuals) {
    if (psi.rows() != residuals.cols() || psi.cols() != residuals.cols()) {
        throw std::invalid_argument("SvObservation: psi does not match residual dimension");
    }
    if (!residuals.allFinite()) {
        throw std::invalid_argument("SvObservation: residuals must be finite");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(psi);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("SvObservation: psi is not positive definite");
    }
    const auto n = static_cast<double>(psi.rows());
    psi_inverse_ = llt.solve(Eigen::MatrixXd::Identity(psi.rows(), psi.cols()));
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    log_norm_ = -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det);
}

void SvObservation::log_density(int t, const Eigen::MatrixXd& particles, Eigen::VectorXd& out) const {
    const Eigen::RowVectorXd eps = residuals_.row(t);
    const Eigen::MatrixXd z = (-particles.array()).exp().rowwise() * eps.array();
    const Eigen::MatrixXd zp = z * psi_inverse_;
    out = (log_norm_ - particles.rowwise().sum().array() -
           0.5 * zp.cwiseProduct(z).rowwise().sum().array())
              .matrix();
}

RandomWalkPrior RandomWalkPrior::from(const VolatilityState& vol) {
    const int n = vol.n();
    return RandomWalkPrior{Eigen::VectorXd::Constant(n, vol.init_mean),
                           Eigen::VectorXd::Constant(n, vol.init_variance),
                           vol.tau_omega.cwiseMax(kTauOmegaFloor)};
}

Eigen::VectorXi systematic_resample(const Eigen::VectorXd& weights, int N, Random& rng) {
    if (N < 1 || weights.size() == 0) {
        throw std::invalid_argument("systematic_resample: need N >= 1 and nonempty weights");
    }
    return systematic_with_offset(cumulative(weights), N, rng.uniform());
}

Eigen::VectorXi conditional_systematic_resample(const Eigen::VectorXd& weights, int keep, Random& rng) {
    const auto N = static_cast<int>(weights.size());
    if (keep < 0 || keep >= N) {
        throw std::invalid_argument("conditional_systematic_resample: keep index out of range");
    }
    if (N == 1) {
        return Eigen::VectorXi(0);
    }
    const std::vector<double> cum = cumulative(weights);
    const double total = cum.back();
    // Offspring of `keep` for offset u: integers k with A <= k + u < B.
    const double A = (keep == 0 ? 0.0 : cum[static_cast<std::size_t>(keep) - 1]) / total * N;
    const double B = cum[static_cast<std::size_t>(keep)] / total * N;
    auto copies = [&](double u) { return std::ceil(B - u) - std::ceil(A - u); };

    std::vector<double> cuts{0.0, A - std::floor(A), B - std::floor(B), 1.0};
    std::sort(cuts.begin(), cuts.end());
    double mass = 0.0;
    std::vector<double> piece_mass(3, 0.0);
    for (int p = 0; p < 3; ++p) {
        const double width = cuts[p + 1] - cuts[p];
        if (width > 0.0) {
            piece_mass[p] = std::max(copies(0.5 * (cuts[p] + cuts[p + 1])), 0.0) * width;
            mass += piece_mass[p];
        }
    }

    double u;
    if (mass > 0.0) {
        double pick = rng.uniform() * mass;
        int p = 0;
        while (p < 2 && pick >= piece_mass[p]) {
            pick -= piece_mass[p];
            ++p;
        }
        while (piece_mass[p] <= 0.0) {
            --p;
        }
        u = cuts[p] + rng.uniform() * (cuts[p + 1] - cuts[p]);
    } else {
        // Reference weight underflowed to zero; no offset produces a copy.
        u = rng.uniform();
    }

    const Eigen::VectorXi all = systematic_with_offset(cum, N, u);
    Eigen::VectorXi others(N - 1);
    bool removed = false;
    int pos = 0;
    for (int k = 0; k < N; ++k) {
        if (!removed && all[k] == keep) {
            removed = true;
            continue;
        }
        if (pos < N - 1) {
            others[pos++] = all[k];
        }
    }
    return others;
}

ParticleSystem capf_forward(const ObservationModel& observation, const RandomWalkPrior& prior,
                            const std::optional<Eigen::MatrixXd>& reference, int N, Random& rng) {
    const int n = observation.dimension();
    const int T = observation.length();
    const bool conditional = reference.has_value();
    if (N < 1 || (!conditional && N < 2)) {
        throw std::invalid_argument("capf_forward: need N >= 2 particles");
    }
    if (T < 1) {
        throw std::invalid_argument("capf_forward: empty observation sequence");
    }
    if (prior.init_mean.size() != n || prior.init_variance.size() != n || prior.step_sd.size() != n) {
        throw std::invalid_argument("capf_forward: prior dimension mismatch");
    }
    if (conditional && (reference->rows() != n || reference->cols() != T)) {
        throw std::invalid_argument("capf_forward: reference trajectory must be n x T");
    }
    const int free_count = conditional ? N - 1 : N;
    const Eigen::VectorXd step = prior.step_sd.cwiseMax(kTauOmegaFloor);
    const Eigen::VectorXd init_sd = prior.init_variance.cwiseSqrt();

    ParticleSystem sys;
    sys.N = N;
    sys.particles.resize(T);
    sys.log_weights.resize(T);
    sys.weights.resize(T);
    sys.ancestors.resize(T);
    if (conditional) {
        sys.reference = *reference;
    }

    const double log_n = std::log(static_cast<double>(N));
    Eigen::MatrixXd current(N, n);
    for (int j = 0; j < free_count; ++j) {
        for (int i = 0; i < n; ++i) {
            current(j, i) = prior.init_mean[i] + init_sd[i] * rng.normal();
        }
    }
    if (conditional) {
        current.row(N - 1) = reference->col(0).transpose();
    }
    Eigen::VectorXd log_w(N);
    observation.log_density(0, current, log_w);
    sys.log_likelihood = normalize(log_w, 0) - log_n;
    sys.particles[0] = current;
    sys.log_weights[0] = log_w;
    sys.weights[0] = log_w.array().exp();
    sys.ancestors[0] = Eigen::VectorXi::LinSpaced(N, 0, N - 1);

    Eigen::VectorXd lookahead(N);
    Eigen::VectorXd first_stage(N);
    Eigen::VectorXd log_g(N);
    for (int t = 1; t < T; ++t) {
        const Eigen::MatrixXd& prev = sys.particles[t - 1];
        observation.log_density(t, prev, lookahead);
        first_stage = sys.log_weights[t - 1] + lookahead;
        sys.log_likelihood += normalize(first_stage, t);
        const Eigen::VectorXd stage_weights = first_stage.array().exp();

        Eigen::VectorXi parents(N);
        if (conditional) {
            parents.head(N - 1) = conditional_systematic_resample(stage_weights, N - 1, rng);
            parents[N - 1] = N - 1;
        } else {
            parents = systematic_resample(stage_weights, N, rng);
        }

        for (int j = 0; j < free_count; ++j) {
            for (int i = 0; i < n; ++i) {
                current(j, i) = prev(parents[j], i) + step[i] * rng.normal();
            }
        }
        if (conditional) {
            current.row(N - 1) = reference->col(t).transpose();
        }
        observation.log_density(t, current, log_g);
        for (int j = 0; j < N; ++j) {
            log_w[j] = log_g[j] - lookahead[parents[j]];
        }
        sys.log_likelihood += normalize(log_w, t) - log_n;
        sys.particles[t] = current;
        sys.log_weights[t] = log_w;
        sys.weights[t] = log_w.array().exp();
        sys.ancestors[t] = parents;
    }
    return sys;
}

Eigen::MatrixXd backward_simulate(const ParticleSystem& system, const RandomWalkPrior& prior, Random& rng) {
    const int T = system.T();
    if (T == 0) {
        throw std::invalid_argument("backward_simulate: empty particle history");
    }
    const auto n = static_cast<int>(system.particles.front().cols());
    const Eigen::ArrayXd inv_var = prior.step_sd.cwiseMax(kTauOmegaFloor).array().square().inverse();
    Eigen::MatrixXd path(n, T);
    int idx = sample_index(system.log_weights[T - 1], rng);
    path.col(T - 1) = system.particles[T - 1].row(idx).transpose();
    Eigen::VectorXd log_b(system.N);
    for (int t = T - 2; t >= 0; --t) {
        const Eigen::MatrixXd& cloud = system.particles[t];
        const Eigen::RowVectorXd next = path.col(t + 1).transpose();
        for (int j = 0; j < system.N; ++j) {
            const Eigen::ArrayXd d = (next - cloud.row(j)).transpose().array();
            log_b[j] = system.log_weights[t][j] - 0.5 * (d.square() * inv_var).sum();
        }
        idx = sample_index(log_b, rng);
        path.col(t) = cloud.row(idx).transpose();
    }
    return path;
}

void pgbs_update(const Eigen::MatrixXd& residuals, VolatilityState& vol, int N, Random& rng) {
    if (residuals.rows() != vol.T() || residuals.cols() != vol.n()) {
        throw std::invalid_argument("pgbs_update: residuals do not match volatility state");
    }
    const SvObservation observation(residuals, vol.psi);
    const RandomWalkPrior prior = RandomWalkPrior::from(vol);
    const ParticleSystem sys = capf_forward(observation, prior, vol.omega, N, rng);
    vol.omega = backward_simulate(sys, prior, rng);
}

} // namespace hsvar
