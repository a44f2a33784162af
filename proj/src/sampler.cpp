#include "hsvar/sampler.hpp"

#include "hsvar/csv.hpp"
#include "hsvar/errors.hpp"
#include "hsvar/particle.hpp"
#include "hsvar/regression.hpp"
#include "hsvar/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace hsvar {

Scheme parse_scheme(const std::string& name) {
    if (name == "hs") return Scheme::hs;
    if (name == "dm") return Scheme::dm;
    if (name == "t") return Scheme::t;
    if (name == "lap") return Scheme::lap;
    if (name == "ridge") return Scheme::ridge;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected hs, dm, t, lap or ridge)");
}

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::hs: return "hs";
    case Scheme::dm: return "dm";
    case Scheme::t: return "t";
    case Scheme::lap: return "lap";
    case Scheme::ridge: return "ridge";
    }
    throw std::invalid_argument("unknown scheme");
}

bool is_shrinkage(Scheme s) { return s != Scheme::dm; }

namespace {

ShrinkScheme scalar_scheme(Scheme s) {
    switch (s) {
    case Scheme::t: return ShrinkScheme::student_t;
    case Scheme::lap: return ShrinkScheme::laplace;
    case Scheme::ridge: return ShrinkScheme::ridge;
    default: throw std::invalid_argument("not a scalar shrinkage scheme");
    }
}

template <typename F>
void run_block(const char* component, F&& body) {
    try {
        body();
    } catch (const ChainError&) {
        throw;
    } catch (const std::exception& e) {
        throw ChainError(-1, component, e.what());
    }
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& m) { return m.colwise().mean().transpose(); }

Eigen::VectorXd column_quantile(const Eigen::MatrixXd& m, double p) {
    Eigen::VectorXd q(m.cols());
    std::vector<double> col(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            col[static_cast<std::size_t>(r)] = m(r, c);
        }
        q[c] = stats::quantile(col, p);
    }
    return q;
}

Eigen::VectorXd column_median(const Eigen::MatrixXd& m) { return column_quantile(m, 0.5); }

} // namespace

void SamplerConfig::validate() const {
    if (iterations < 1 || burn_in < 0 || burn_in >= iterations) {
        throw std::invalid_argument("SamplerConfig: need 0 <= burn_in < iterations");
    }
    if (thin < 1) {
        throw std::invalid_argument("SamplerConfig: thin must be >= 1");
    }
    if (particles < 1) {
        throw std::invalid_argument("SamplerConfig: particle count must be positive");
    }
    if (adapt_window < 1) {
        throw std::invalid_argument("SamplerConfig: adaptation window must be positive");
    }
    if (!(lkj_shape > 0.0) || !(init_variance > 0.0) || !(initial_tau_omega > 0.0)) {
        throw std::invalid_argument("SamplerConfig: LKJ shape, initial variance and tau must be positive");
    }
    if (psi_step < 0.0 || tau_step < 0.0) {
        throw std::invalid_argument("SamplerConfig: Metropolis steps must be non-negative");
    }
}

void Tuning::reset_counts() {
    psi_accepted = 0;
    tau_accepted = Eigen::VectorXi::Zero(tau_steps.size());
    window_count = 0;
}

void Tuning::adapt() {
    if (window_count == 0) {
        return;
    }
    auto rescale = [](double step, double rate) {
        if (rate < 0.2) return step * 0.7;
        if (rate > 0.4) return step * 1.3;
        return step;
    };
    psi_step = rescale(psi_step, static_cast<double>(psi_accepted) / window_count);
    for (Eigen::Index i = 0; i < tau_steps.size(); ++i) {
        tau_steps[i] = rescale(tau_steps[i], static_cast<double>(tau_accepted[i]) / window_count);
    }
    reset_counts();
}

ChainError::ChainError(int iteration, std::string component, const std::string& what)
    : std::runtime_error(what), iteration_(iteration), component_(std::move(component)) {}

ChainState initialize(const RegressionData& data, const SamplerConfig& config, Random& rng) {
    const int n = data.shape.n;
    const int lags = data.shape.lags;
    const int T = data.shape.T;

    CoefTensor ols(n, lags);
    try {
        ols = fit_ols(data);
    } catch (const SingularDesignError& e) {
        std::clog << "warning: OLS start infeasible (" << e.what() << "); starting theta at zero\n";
    }

    ChainState state{ols, HorseshoeState::initial(n, lags), {}};
    switch (config.scheme) {
    case Scheme::hs:
        break;
    case Scheme::dm: {
        auto dm = DiscreteMixtureState::initial(n, lags, config.mixture);
        dm.beta = ols.flat();
        state.latents = dm;
        state.theta = effective_theta(dm);
        break;
    }
    default:
        state.latents = ScalarShrinkState::initial(scalar_scheme(config.scheme), n, lags, config.shrinkage);
        break;
    }

    state.vol = VolatilityState::constant(n, T, 0.0, config.initial_tau_omega);
    state.vol.init_mean = config.init_mean;
    state.vol.init_variance = config.init_variance;
    if (!config.fixed_volatility) {
        for (int t = 0; t < T; ++t) {
            for (int i = 0; i < n; ++i) {
                state.vol.omega(i, t) = rng.normal();
            }
        }
    }
    return state;
}

void gibbs_sweep(const RegressionData& data, ChainState& state, const SamplerConfig& config,
                 Tuning& tuning, Random& rng) {
    const UpdateMask& up = config.updates;
    if (up.theta) {
        run_block("theta", [&] {
            if (auto* hs = std::get_if<HorseshoeState>(&state.latents)) {
                state.theta = sample_theta(data, hs->prior_variances(), state.vol, rng);
            } else if (auto* ss = std::get_if<ScalarShrinkState>(&state.latents)) {
                state.theta = sample_theta(data, ss->prior_variances(), state.vol, rng);
            } else {
                auto& dm = std::get<DiscreteMixtureState>(state.latents);
                sample_delta(data, dm, state.vol, rng);
                sample_beta(data, dm, state.vol, rng);
                state.theta = effective_theta(dm);
            }
        });
    }
    if (up.latents) {
        run_block("prior-latents", [&] {
            if (auto* hs = std::get_if<HorseshoeState>(&state.latents)) {
                sample_horseshoe_scales(state.theta, *hs, rng);
            } else if (auto* ss = std::get_if<ScalarShrinkState>(&state.latents)) {
                sample_scalar_scales(state.theta, *ss, rng);
            } else {
                sample_pi(std::get<DiscreteMixtureState>(state.latents), rng);
            }
        });
    }
    if (config.fixed_volatility) {
        return;
    }
    const Eigen::MatrixXd eps = residuals(data, state.theta);
    if (up.omega) {
        run_block("omega-pgbs", [&] { pgbs_update(eps, state.vol, config.particles, rng); });
    }
    if (up.psi) {
        run_block("psi", [&] {
            if (sample_psi(eps, state.vol, config.lkj_shape, tuning.psi_step, rng)) {
                ++tuning.psi_accepted;
            }
        });
    }
    if (up.tau_omega) {
        run_block("tau-omega", [&] {
            const auto accepted = sample_tau_omega(state.vol.omega, state.vol.tau_omega, tuning.tau_steps, rng);
            for (std::size_t i = 0; i < accepted.size(); ++i) {
                tuning.tau_accepted[static_cast<Eigen::Index>(i)] += accepted[i] ? 1 : 0;
            }
        });
    }
}

FrameLayout frame_layout(Scheme scheme, int n, int lags, int T) {
    const auto d = static_cast<std::size_t>(n) * n * lags;
    FrameLayout layout;
    layout.add("theta", d);
    switch (scheme) {
    case Scheme::hs:
        layout.add("lambda_sq", d);
        layout.add("tau_sq", n);
        break;
    case Scheme::dm:
        layout.add("delta", d);
        layout.add("beta", d);
        layout.add("pi", n);
        break;
    default:
        layout.add("lambda_sq", d);
        break;
    }
    layout.add("omega", static_cast<std::size_t>(n) * T);
    layout.add("psi", static_cast<std::size_t>(n) * n);
    layout.add("tau_omega", n);
    return layout;
}

std::vector<double> make_frame(const ChainState& state, const FrameLayout& layout) {
    std::vector<double> frame;
    frame.reserve(layout.frame_length());
    auto put = [&](const auto& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            frame.push_back(static_cast<double>(v.data()[k]));
        }
    };
    put(state.theta.flat());
    if (const auto* hs = std::get_if<HorseshoeState>(&state.latents)) {
        put(hs->lambda_sq);
        put(hs->tau_sq);
    } else if (const auto* ss = std::get_if<ScalarShrinkState>(&state.latents)) {
        put(ss->lambda_sq);
    } else {
        const auto& dm = std::get<DiscreteMixtureState>(state.latents);
        put(dm.delta);
        put(dm.beta);
        put(dm.pi);
    }
    put(state.vol.omega);  // column-major: (i, t) at t*n + i
    put(state.vol.psi);
    put(state.vol.tau_omega);
    if (frame.size() != layout.frame_length()) {
        throw std::logic_error("make_frame: state does not match layout");
    }
    return frame;
}

ChainStore run_chain(const RegressionData& data, const SamplerConfig& config, const RunOptions& options) {
    config.validate();
    const int n = data.shape.n;
    Random rng(config.seed);

    ChainState state;
    Tuning tuning;
    if (options.warm_start) {
        state = options.warm_start->state;
        tuning.psi_step = options.warm_start->psi_step;
        tuning.tau_steps = options.warm_start->tau_steps;
        if (state.vol.T() != data.shape.T || state.vol.n() != n) {
            throw std::invalid_argument("run_chain: warm start does not match data dimensions");
        }
    } else {
        state = initialize(data, config, rng);
        tuning.psi_step = config.psi_step;
        tuning.tau_steps = Eigen::VectorXd::Constant(n, config.tau_step);
    }
    tuning.reset_counts();

    ChainManifest manifest;
    manifest.scheme = to_string(config.scheme);
    manifest.n = n;
    manifest.lags = data.shape.lags;
    manifest.T = data.shape.T;
    manifest.iterations = config.iterations;
    manifest.burn_in = config.burn_in;
    manifest.thin = config.thin;
    manifest.particles = config.particles;
    manifest.seed = config.seed;
    manifest.series_ids = options.series_ids;
    ChainStore store(manifest, frame_layout(config.scheme, n, data.shape.lags, data.shape.T));
    if (options.store_dir) {
        store.attach(*options.store_dir);
    }

    for (int it = 0; it < config.iterations; ++it) {
        try {
            gibbs_sweep(data, state, config, tuning, rng);
        } catch (const ChainError& e) {
            const std::string msg = "iteration " + std::to_string(it) + " [" + e.component() + "]: " + e.what();
            store.manifest().psi_step = tuning.psi_step;
            store.manifest().tau_steps.assign(tuning.tau_steps.data(), tuning.tau_steps.data() + n);
            store.finalize(false, msg);
            throw ChainError(it, e.component(), msg);
        }
        if (it < config.burn_in) {
            if (++tuning.window_count == config.adapt_window) {
                tuning.adapt();
            }
        } else if ((it - config.burn_in) % config.thin == 0) {
            store.append(make_frame(state, store.layout()));
        }
    }
    store.manifest().psi_step = tuning.psi_step;
    store.manifest().tau_steps.assign(tuning.tau_steps.data(), tuning.tau_steps.data() + n);
    store.finalize(true);
    return store;
}

WarmStart warm_start_from(const ChainStore& store, const SamplerConfig& config, int next_T) {
    if (store.frame_count() == 0) {
        throw std::invalid_argument("warm_start_from: store has no frames");
    }
    const auto& m = store.manifest();
    const int n = m.n;
    const int lags = m.lags;
    const Scheme scheme = parse_scheme(m.scheme);
    if (next_T < m.T) {
        throw std::invalid_argument("warm_start_from: next sample is shorter than the stored one");
    }

    WarmStart warm;
    warm.psi_step = m.psi_step;
    warm.tau_steps = Eigen::Map<const Eigen::VectorXd>(m.tau_steps.data(), static_cast<Eigen::Index>(m.tau_steps.size()));

    const Eigen::VectorXd theta_mean = column_means(store.section_matrix("theta"));
    switch (scheme) {
    case Scheme::hs: {
        auto hs = HorseshoeState::initial(n, lags);
        hs.lambda_sq = column_median(store.section_matrix("lambda_sq"));
        hs.tau_sq = column_median(store.section_matrix("tau_sq"));
        warm.state.latents = hs;
        warm.state.theta = CoefTensor(n, lags, theta_mean);
        break;
    }
    case Scheme::dm: {
        auto dm = DiscreteMixtureState::initial(n, lags, config.mixture);
        const Eigen::VectorXd inclusion = column_means(store.section_matrix("delta"));
        dm.delta = (inclusion.array() >= 0.5).cast<int>();
        dm.beta = column_means(store.section_matrix("beta"));
        dm.pi = column_means(store.section_matrix("pi"));
        warm.state.latents = dm;
        warm.state.theta = effective_theta(dm);
        break;
    }
    default: {
        auto ss = ScalarShrinkState::initial(scalar_scheme(scheme), n, lags, config.shrinkage);
        ss.lambda_sq = column_median(store.section_matrix("lambda_sq"));
        warm.state.latents = ss;
        warm.state.theta = CoefTensor(n, lags, theta_mean);
        break;
    }
    }

    const Eigen::VectorXd omega_mean = column_means(store.section_matrix("omega"));
    VolatilityState vol;
    vol.omega.resize(n, next_T);
    for (int t = 0; t < next_T; ++t) {
        const int src = std::min(t, m.T - 1);
        vol.omega.col(t) = omega_mean.segment(static_cast<Eigen::Index>(src) * n, n);
    }
    const auto last_psi = store.section(store.frame_count() - 1, "psi");
    vol.psi = Eigen::Map<const Eigen::MatrixXd>(last_psi.data(), n, n);
    vol.tau_omega = column_means(store.section_matrix("tau_omega"));
    vol.init_mean = config.init_mean;
    vol.init_variance = config.init_variance;
    warm.state.vol = vol;
    return warm;
}

SummaryReport summarize(const ChainStore& store) {
    const std::size_t frames = store.frame_count();
    if (frames < 100) {
        throw std::invalid_argument("summarize: need at least 100 stored frames, have " + std::to_string(frames));
    }
    const auto& m = store.manifest();
    SummaryReport r;
    r.scheme = m.scheme;
    r.n = m.n;
    r.lags = m.lags;
    r.T = m.T;
    r.frames = frames;

    const Eigen::MatrixXd theta = store.section_matrix("theta");
    r.theta_mean = column_means(theta);
    r.theta_q05 = column_quantile(theta, 0.05);
    r.theta_q50 = column_quantile(theta, 0.5);
    r.theta_q95 = column_quantile(theta, 0.95);

    if (store.layout().has("lambda_sq")) {
        const Eigen::MatrixXd lambda_sq = store.section_matrix("lambda_sq");
        r.kappa_map.resize(lambda_sq.cols());
        std::vector<double> kappa(frames);
        for (Eigen::Index c = 0; c < lambda_sq.cols(); ++c) {
            for (std::size_t k = 0; k < frames; ++k) {
                kappa[k] = kappa_from_lambda_sq(lambda_sq(static_cast<Eigen::Index>(k), c));
            }
            r.kappa_map[c] = map_kappa(kappa);
            r.kappa_histograms.push_back(kappa_histogram(kappa));
        }
    }
    if (store.layout().has("delta")) {
        r.inclusion = column_means(store.section_matrix("delta"));
    }

    const Eigen::MatrixXd omega = store.section_matrix("omega");
    auto reshape = [&](const Eigen::VectorXd& v) {
        return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(v.data(), m.n, m.T));
    };
    r.omega_q05 = reshape(column_quantile(omega, 0.05));
    r.omega_q50 = reshape(column_quantile(omega, 0.5));
    r.omega_q95 = reshape(column_quantile(omega, 0.95));
    const Eigen::VectorXd psi_mean = column_means(store.section_matrix("psi"));
    r.psi_mean = Eigen::Map<const Eigen::MatrixXd>(psi_mean.data(), m.n, m.n);
    r.tau_omega_mean = column_means(store.section_matrix("tau_omega"));
    return r;
}

void write_summary(const SummaryReport& r, const std::filesystem::path& dir,
                   const std::vector<std::string>& series_ids) {
    std::filesystem::create_directories(dir);
    auto name = [&](int i) {
        return i < static_cast<int>(series_ids.size()) ? series_ids[static_cast<std::size_t>(i)]
                                                       : "y" + std::to_string(i + 1);
    };
    const bool shrink = r.kappa_map.size() > 0;
    const bool mixture = r.inclusion.size() > 0;

    CsvWriter coef(dir / "coefficients.csv");
    std::vector<std::string> header{"equation", "predictor", "lag", "mean", "q05", "q50", "q95"};
    if (shrink) header.push_back("kappa_map");
    if (mixture) {
        header.push_back("inclusion");
        header.push_back("exclusion");
    }
    coef.row(header);
    int m = 0;
    for (int i = 0; i < r.n; ++i) {
        for (int j = 0; j < r.n; ++j) {
            for (int k = 0; k < r.lags; ++k, ++m) {
                std::vector<std::string> row{name(i), name(j), std::to_string(k + 1),
                                             format_number(r.theta_mean[m]), format_number(r.theta_q05[m]),
                                             format_number(r.theta_q50[m]), format_number(r.theta_q95[m])};
                if (shrink) row.push_back(format_number(r.kappa_map[m]));
                if (mixture) {
                    row.push_back(format_number(r.inclusion[m]));
                    row.push_back(format_number(1.0 - r.inclusion[m]));
                }
                coef.row(row);
            }
        }
    }

    if (shrink) {
        CsvWriter hist(dir / "kappa_histograms.csv");
        std::vector<std::string> h{"equation", "predictor", "lag"};
        for (int b = 0; b < kKappaBins; ++b) {
            h.push_back("bin_" + format_number((b + 0.5) / kKappaBins));
        }
        hist.row(h);
        m = 0;
        for (int i = 0; i < r.n; ++i) {
            for (int j = 0; j < r.n; ++j) {
                for (int k = 0; k < r.lags; ++k, ++m) {
                    std::vector<std::string> row{name(i), name(j), std::to_string(k + 1)};
                    for (int c : r.kappa_histograms[static_cast<std::size_t>(m)]) {
                        row.push_back(std::to_string(c));
                    }
                    hist.row(row);
                }
            }
        }
    }

    CsvWriter vol(dir / "volatility.csv");
    vol.row({"series", "t", "omega_q05", "omega_q50", "omega_q95"});
    for (int i = 0; i < r.n; ++i) {
        for (int t = 0; t < r.T; ++t) {
            vol.row({name(i), std::to_string(t + 1), format_number(r.omega_q05(i, t)),
                     format_number(r.omega_q50(i, t)), format_number(r.omega_q95(i, t))});
        }
    }

    nlohmann::ordered_json j;
    j["scheme"] = r.scheme;
    j["n"] = r.n;
    j["lags"] = r.lags;
    j["T"] = r.T;
    j["frames"] = r.frames;
    j["series_ids"] = series_ids;
    std::vector<std::vector<double>> psi(static_cast<std::size_t>(r.n));
    for (int a = 0; a < r.n; ++a) {
        for (int b = 0; b < r.n; ++b) {
            psi[static_cast<std::size_t>(a)].push_back(r.psi_mean(a, b));
        }
    }
    j["psi_mean"] = psi;
    j["tau_omega_mean"] = std::vector<double>(r.tau_omega_mean.data(), r.tau_omega_mean.data() + r.tau_omega_mean.size());
    std::ofstream out(dir / "summary.json", std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write summary.json");
    }
    out << j.dump(2) << '\n';
}

} // namespace hsvar
