#include "hsvar/experiments.hpp"

#include "hsvar/csv.hpp"
#include "hsvar/stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#ifndef HSVAR_VERSION
#define HSVAR_VERSION "unknown"
#endif

namespace hsvar {

namespace {

std::string series_name(const std::vector<std::string>& ids, int i) {
    return i < static_cast<int>(ids.size()) ? ids[static_cast<std::size_t>(i)] : "y" + std::to_string(i + 1);
}

std::vector<std::string> default_ids(int n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        ids.push_back("y" + std::to_string(i + 1));
    }
    return ids;
}

/// Lags 1..P of the row after the last one in `values`.
Eigen::VectorXd next_design_row(const Eigen::MatrixXd& values, int lags) {
    const auto n = static_cast<int>(values.cols());
    const auto last = static_cast<int>(values.rows()) - 1;
    if (last + 1 < lags) {
        throw std::invalid_argument("next_design_row: fewer than P rows");
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(n) * lags);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < lags; ++k) {
            x[j * lags + k] = values(last - k, j);
        }
    }
    return x;
}

std::vector<CoefTensor> evenly_spaced_draws(const ChainStore& store, int n, int lags, int draws) {
    const std::size_t frames = store.frame_count();
    if (frames == 0) {
        throw std::runtime_error("forecast: chain retained no draws");
    }
    const std::size_t R = std::min<std::size_t>(frames, static_cast<std::size_t>(draws));
    std::vector<CoefTensor> out;
    out.reserve(R);
    for (std::size_t r = 0; r < R; ++r) {
        const std::size_t k = r * frames / R;
        const auto theta = store.section(k, "theta");
        out.emplace_back(n, lags, Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())));
    }
    return out;
}

double rmsfe_column(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& real, Eigen::Index c) {
    return std::sqrt((pred.col(c) - real.col(c)).squaredNorm() / static_cast<double>(pred.rows()));
}

} // namespace

Design parse_design(const std::string& name) {
    if (name == "1" || name == "sim1") return Design::sim1;
    if (name == "2" || name == "sim2") return Design::sim2;
    if (name == "3" || name == "sim3") return Design::sim3;
    throw std::invalid_argument("unknown design '" + name + "' (expected 1, 2 or 3)");
}

std::string to_string(Design d) {
    switch (d) {
    case Design::sim1: return "sim1";
    case Design::sim2: return "sim2";
    case Design::sim3: return "sim3";
    }
    throw std::invalid_argument("unknown design");
}

CoefTensor draw_coefficients(Design design, int n, int lags, Random& rng) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n) * n * lags);
    for (Eigen::Index m = 0; m < v.size(); ++m) {
        switch (design) {
        case Design::sim1:
            v[m] = rng.uniform() < 0.5 ? 0.0 : 0.3 * rng.normal();
            break;
        case Design::sim2:
            v[m] = 0.15 * rng.normal();
            break;
        case Design::sim3: {
            const double u = rng.uniform();
            if (u < 0.8) {
                v[m] = 0.15 * rng.normal();
            } else if (u < 0.9) {
                v[m] = 0.5 + 0.05 * rng.normal();
            } else {
                v[m] = -0.5 + 0.05 * rng.normal();
            }
            break;
        }
        }
    }
    return CoefTensor(n, lags, v);
}

double companion_radius(const CoefTensor& theta) {
    const int n = theta.n();
    const int lags = theta.lags();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * lags, n * lags);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < lags; ++k) {
                companion(i, k * n + j) = theta(i, j, k);
            }
        }
    }
    if (lags > 1) {
        companion.bottomLeftCorner(n * (lags - 1), n * (lags - 1)).setIdentity();
    }
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

double default_radius_limit(Design design) {
    return design == Design::sim3 ? std::numeric_limits<double>::infinity() : 1.0;
}

Simulation generate_simulation(const SimulationSpec& spec) {
    if (spec.T < 1 || spec.n < 1 || spec.lags < 1 || spec.warmup < 0 || !(spec.noise_variance > 0.0)) {
        throw std::invalid_argument("generate_simulation: invalid spec");
    }
    const int rows = spec.T + spec.lags;
    const int total = spec.lags + spec.warmup + rows;  // zero start lags, then warm-up, then kept rows
    const double sd = std::sqrt(spec.noise_variance);
    const double radius_limit = spec.max_spectral_radius.value_or(default_radius_limit(spec.design));
    for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
        Random rng = Random::substream(spec.seed, static_cast<std::uint64_t>(attempt));
        CoefTensor theta = draw_coefficients(spec.design, spec.n, spec.lags, rng);
        if (companion_radius(theta) >= radius_limit) {
            continue;
        }
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(total, spec.n);
        bool explosive = false;
        for (int t = spec.lags; t < total && !explosive; ++t) {
            const Eigen::VectorXd mu = conditional_mean(theta, build_design_row(y, t, spec.lags));
            for (int i = 0; i < spec.n; ++i) {
                y(t, i) = mu[i] + sd * rng.normal();
                if (!(std::abs(y(t, i)) <= spec.explosive_limit)) {
                    explosive = true;
                }
            }
        }
        if (!explosive) {
            if (attempt > 0) {
                std::clog << "note: " << attempt << " nonstationary or explosive coefficient draw(s) redrawn\n";
            }
            return Simulation{y.bottomRows(rows), theta, attempt};
        }
    }
    throw std::runtime_error("generate_simulation: every coefficient draw was rejected after " +
                             std::to_string(spec.max_redraws) + " redraws");
}

SimulationReport run_simulation_study(const SimulationSpec& spec, const SamplerConfig& config,
                                      const std::optional<std::filesystem::path>& store_dir) {
    if (config.scheme != Scheme::hs && config.scheme != Scheme::dm) {
        throw std::invalid_argument("run_simulation_study: scheme must be hs or dm");
    }
    SimulationReport report{spec, config, generate_simulation(spec), {}};
    const RegressionData data = make_regression_data(report.simulation.values, spec.lags);
    RunOptions options;
    options.store_dir = store_dir;
    options.series_ids = default_ids(spec.n);
    const ChainStore store = run_chain(data, config, options);
    report.summary = summarize(store);
    return report;
}

std::vector<std::pair<double, double>> shrinkage_pairs(const SimulationReport& report) {
    const Eigen::VectorXd& truth = report.simulation.theta.flat();
    std::vector<std::pair<double, double>> out;
    for (Eigen::Index m = 0; m < truth.size(); ++m) {
        const double s = report.summary.kappa_map.size() > 0 ? report.summary.kappa_map[m]
                                                              : 1.0 - report.summary.inclusion[m];
        out.emplace_back(std::abs(truth[m]), s);
    }
    return out;
}

std::uint64_t origin_seed(std::uint64_t seed, int origin_row) {
    return mix_seed(mix_seed(seed) ^ (0xA24BAED4963EE407ULL * static_cast<std::uint64_t>(origin_row + 1)));
}

int first_origin_row(const TimeSeriesPanel& panel, const ForecastConfig& config) {
    int row;
    if (config.first_origin) {
        auto it = std::find(panel.dates.begin(), panel.dates.end(), *config.first_origin);
        if (it == panel.dates.end()) {
            throw std::invalid_argument("forecast: first origin " + config.first_origin->iso() + " is not in the panel");
        }
        row = static_cast<int>(it - panel.dates.begin());
    } else {
        row = panel.rows() - config.origins - 1;
    }
    if (row < 0 || row + 1 >= panel.rows()) {
        throw std::invalid_argument("forecast: no realized value after the first origin");
    }
    const int n = panel.series_count();
    if (row + 1 - config.lags <= n * config.lags) {
        throw std::invalid_argument("forecast: insufficient sample at first origin (" + std::to_string(row + 1) +
                                    " rows for " + std::to_string(n * config.lags) + " regressors per equation)");
    }
    return row;
}

ForecastReport run_forecast_study(const TimeSeriesPanel& panel, const ForecastConfig& config) {
    if (config.schemes.empty()) {
        throw std::invalid_argument("forecast: no schemes requested");
    }
    if (panel.standardized()) {
        throw std::invalid_argument("forecast: expects an unstandardized panel");
    }
    if (config.origins < 1 || config.draws < 1) {
        throw std::invalid_argument("forecast: origins and draws must be positive");
    }
    const int n = panel.series_count();
    const int P = config.lags;
    const int first = first_origin_row(panel, config);
    const int count = std::min(config.origins, panel.rows() - 1 - first);

    ForecastReport report;
    report.series_ids = panel.series_ids;
    report.realized.resize(count, n);
    report.ols_predictions.resize(count, n);

    struct Cut {
        TimeSeriesPanel standardized;
        RegressionData data;
        Eigen::VectorXd next_row;
    };
    auto cut_at = [&](int origin) {
        Cut c;
        c.standardized = standardize(panel.head(origin + 1));
        c.data = make_regression_data(c.standardized.values, P);
        c.next_row = next_design_row(c.standardized.values, P);
        return c;
    };
    auto unstandardize = [&](const Cut& c, const Eigen::VectorXd& z) {
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            y[i] = c.standardized.standardization[static_cast<std::size_t>(i)].mean +
                   c.standardized.standardization[static_cast<std::size_t>(i)].sd * z[i];
        }
        return y;
    };

    for (int o = 0; o < count; ++o) {
        const int origin = first + o;
        const Cut c = cut_at(origin);
        report.target_dates.push_back(panel.dates[static_cast<std::size_t>(origin + 1)]);
        report.realized.row(o) = panel.values.row(origin + 1);
        const CoefTensor ols = fit_ols(c.data);
        report.ols_predictions.row(o) = unstandardize(c, conditional_mean(ols, c.next_row)).transpose();
    }
    report.ols_rmsfe.resize(n);
    for (int i = 0; i < n; ++i) {
        report.ols_rmsfe[i] = rmsfe_column(report.ols_predictions, report.realized, i);
    }

    for (Scheme scheme : config.schemes) {
        SchemeForecast f;
        f.scheme = scheme;
        f.predictions.resize(count, n);
        std::optional<WarmStart> warm;
        for (int o = 0; o < count; ++o) {
            const int origin = first + o;
            const Cut c = cut_at(origin);
            SamplerConfig sc = config.first;
            sc.scheme = scheme;
            sc.seed = origin_seed(config.first.seed, origin);
            if (o > 0) {
                sc.iterations = config.origin_iterations;
                sc.burn_in = config.origin_burn_in;
                sc.thin = config.origin_thin;
            }
            RunOptions options;
            options.warm_start = warm;
            options.series_ids = panel.series_ids;
            const ChainStore store = run_chain(c.data, sc, options);
            const auto draws = evenly_spaced_draws(store, n, P, config.draws);
            f.predictions.row(o) = unstandardize(c, forecast_mean(draws, c.next_row)).transpose();
            if (o == 0 && store.frame_count() >= 100) {
                f.first_origin_summary = summarize(store);
            }
            if (o + 1 < count) {
                warm = warm_start_from(store, sc, c.data.shape.T + 1);
            }
            std::clog << to_string(scheme) << ": origin " << panel.dates[static_cast<std::size_t>(origin)].iso() << " ("
                      << o + 1 << "/" << count << ")\n";
        }
        f.rmsfe.resize(n);
        f.ratio.resize(n);
        for (int i = 0; i < n; ++i) {
            f.rmsfe[i] = rmsfe_column(f.predictions, report.realized, i);
            f.ratio[i] = f.rmsfe[i] / report.ols_rmsfe[i];
        }
        f.average_ratio = f.ratio.mean();
        report.schemes.push_back(std::move(f));
    }
    return report;
}

void write_equation_tables(const SummaryReport& s, const std::filesystem::path& dir,
                           const std::vector<std::string>& series_ids) {
    std::filesystem::create_directories(dir);
    const int n = s.n;
    const int P = s.lags;
    for (int i = 0; i < n; ++i) {
        const std::string eq = series_name(series_ids, i);
        if (s.kappa_map.size() > 0) {
            CsvWriter out(dir / ("shrinkage_profile_" + eq + ".csv"));
            std::vector<std::string> header{"predictor", "lag", "map_kappa"};
            for (int b = 0; b < kKappaBins; ++b) {
                header.push_back("density_" + format_number((b + 0.5) / kKappaBins));
            }
            out.row(header);
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < P; ++k) {
                    const int m = (i * n + j) * P + k;
                    const auto& h = s.kappa_histograms[static_cast<std::size_t>(m)];
                    double total = 0.0;
                    for (int c : h) total += c;
                    std::vector<std::string> row{series_name(series_ids, j), std::to_string(k + 1),
                                                 format_number(s.kappa_map[m])};
                    for (int c : h) {
                        row.push_back(format_number(total > 0 ? c * kKappaBins / total : 0.0));
                    }
                    out.row(row);
                }
            }
        }
        if (s.inclusion.size() > 0) {
            CsvWriter out(dir / ("inclusion_" + eq + ".csv"));
            std::vector<std::string> header{"lag"};
            for (int j = 0; j < n; ++j) {
                header.push_back(series_name(series_ids, j));
            }
            out.row(header);
            for (int k = 0; k < P; ++k) {
                std::vector<std::string> row{std::to_string(k + 1)};
                for (int j = 0; j < n; ++j) {
                    row.push_back(format_number(s.inclusion[(i * n + j) * P + k]));
                }
                out.row(row);
            }
        }
    }
}

void emit_reports(const ForecastReport& report, const std::filesystem::path& dir, int lags) {
    std::filesystem::create_directories(dir);
    const auto n = static_cast<int>(report.series_ids.size());
    {
        CsvWriter out(dir / "rmsfe.csv");
        std::vector<std::string> header{"series"};
        for (const auto& f : report.schemes) header.push_back(to_string(f.scheme));
        out.row(header);
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> row{report.series_ids[static_cast<std::size_t>(i)]};
            for (const auto& f : report.schemes) row.push_back(format_number(f.ratio[i]));
            out.row(row);
        }
        std::vector<std::string> avg{"average"};
        for (const auto& f : report.schemes) avg.push_back(format_number(f.average_ratio));
        out.row(avg);
    }
    {
        CsvWriter out(dir / "predictions.csv");
        out.row({"model", "target_date", "series", "prediction", "realized"});
        auto emit = [&](const std::string& model, const Eigen::MatrixXd& pred) {
            for (Eigen::Index o = 0; o < pred.rows(); ++o) {
                for (int i = 0; i < n; ++i) {
                    out.row({model, report.target_dates[static_cast<std::size_t>(o)].iso(),
                             report.series_ids[static_cast<std::size_t>(i)], format_number(pred(o, i)),
                             format_number(report.realized(o, i))});
                }
            }
        };
        emit("ols", report.ols_predictions);
        for (const auto& f : report.schemes) emit(to_string(f.scheme), f.predictions);
    }
    {
        CsvWriter out(dir / "rmsfe_absolute.csv");
        std::vector<std::string> header{"series", "ols"};
        for (const auto& f : report.schemes) header.push_back(to_string(f.scheme));
        out.row(header);
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> row{report.series_ids[static_cast<std::size_t>(i)],
                                         format_number(report.ols_rmsfe[i])};
            for (const auto& f : report.schemes) row.push_back(format_number(f.rmsfe[i]));
            out.row(row);
        }
    }
    for (const auto& f : report.schemes) {
        if (f.first_origin_summary.frames > 0) {
            if (f.first_origin_summary.lags != lags) {
                throw std::logic_error("emit_reports: summary lag order mismatch");
            }
            write_equation_tables(f.first_origin_summary, dir / to_string(f.scheme), report.series_ids);
        }
    }
}

void emit_simulation(const SimulationReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const int n = report.spec.n;
    const int P = report.spec.lags;
    const auto ids = default_ids(n);
    {
        CsvWriter out(dir / "data.csv");
        std::vector<std::string> header{"t"};
        header.insert(header.end(), ids.begin(), ids.end());
        out.row(header);
        for (Eigen::Index t = 0; t < report.simulation.values.rows(); ++t) {
            std::vector<std::string> row{std::to_string(t + 1)};
            for (int i = 0; i < n; ++i) row.push_back(format_number(report.simulation.values(t, i)));
            out.row(row);
        }
    }
    const auto pairs = shrinkage_pairs(report);
    const bool dm = report.summary.inclusion.size() > 0;
    CsvWriter out(dir / "shrinkage_points.csv");
    out.row({"equation", "predictor", "lag", "true_theta", "abs_true_theta", dm ? "exclusion_probability" : "map_kappa",
             "posterior_mean"});
    int m = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < P; ++k, ++m) {
                out.row({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)], std::to_string(k + 1),
                         format_number(report.simulation.theta.flat()[m]), format_number(pairs[static_cast<std::size_t>(m)].first),
                         format_number(pairs[static_cast<std::size_t>(m)].second),
                         format_number(report.summary.theta_mean[m])});
            }
        }
    }
    write_summary(report.summary, dir, ids);
    write_equation_tables(report.summary, dir, ids);

    nlohmann::ordered_json manifest;
    manifest["command"] = "simulate";
    manifest["version"] = version_string();
    manifest["design"] = to_string(report.spec.design);
    manifest["seed"] = report.spec.seed;
    manifest["T"] = report.spec.T;
    manifest["n"] = n;
    manifest["lags"] = P;
    manifest["noise_variance"] = report.spec.noise_variance;
    manifest["warmup"] = report.spec.warmup;
    const double limit = report.spec.max_spectral_radius.value_or(default_radius_limit(report.spec.design));
    if (std::isfinite(limit)) {
        manifest["max_spectral_radius"] = limit;
    } else {
        manifest["max_spectral_radius"] = nullptr;
    }
    manifest["explosive_limit"] = report.spec.explosive_limit;
    manifest["redraws"] = report.simulation.redraws;
    manifest["spectral_radius"] = companion_radius(report.simulation.theta);
    manifest["sampler"] = sampler_json(report.config);
    write_manifest(manifest, dir / "manifest.json");
}

SamplerConfig sampler_config_from(const Config& c, const SamplerConfig& d) {
    SamplerConfig s = d;
    s.iterations = c.get_int("iterations", d.iterations);
    s.burn_in = c.get_int("burn_in", d.burn_in);
    s.thin = c.get_int("thin", d.thin);
    s.particles = c.get_int("particles", d.particles);
    s.seed = c.get_seed("seed", d.seed);
    s.adapt_window = c.get_int("adapt_window", d.adapt_window);
    s.lkj_shape = c.get_double("lkj_shape", d.lkj_shape);
    s.initial_tau_omega = c.get_double("initial_tau_omega", d.initial_tau_omega);
    s.init_mean = c.get_double("omega_init_mean", d.init_mean);
    s.init_variance = c.get_double("omega_init_variance", d.init_variance);
    s.psi_step = c.get_double("psi_step", d.psi_step);
    s.tau_step = c.get_double("tau_step", d.tau_step);
    s.shrinkage.t_a = c.get_double("t_a", d.shrinkage.t_a);
    s.shrinkage.t_b = c.get_double("t_b", d.shrinkage.t_b);
    s.shrinkage.laplace_rate = c.get_double("laplace_rate", d.shrinkage.laplace_rate);
    s.shrinkage.ridge_variance = c.get_double("ridge_variance", d.shrinkage.ridge_variance);
    s.mixture.a = c.get_double("mixture_a", d.mixture.a);
    s.mixture.b = c.get_double("mixture_b", d.mixture.b);
    s.mixture.slab_variance = c.get_double("slab_variance", d.mixture.slab_variance);
    s.fixed_volatility = c.get_bool("fixed_volatility", d.fixed_volatility);
    s.validate();
    return s;
}

ForecastConfig forecast_config_from(const Config& c) {
    ForecastConfig f;
    f.lags = c.get_int("lags", f.lags);
    f.origins = c.get_int("forecast.origins", f.origins);
    if (c.has("forecast.first_origin")) {
        f.first_origin = Date::parse(c.get("forecast.first_origin"));
    }
    SamplerConfig first;
    first.iterations = 30000;
    first.burn_in = 5000;
    first.thin = 25;
    f.first = sampler_config_from(c, first);
    f.origin_iterations = c.get_int("forecast.origin_iterations", f.origin_iterations);
    f.origin_burn_in = c.get_int("forecast.origin_burn_in", f.origin_burn_in);
    f.origin_thin = c.get_int("forecast.origin_thin", f.origin_thin);
    f.draws = c.get_int("forecast.draws", f.draws);
    if (f.origin_burn_in < 0 || f.origin_burn_in >= f.origin_iterations || f.origin_thin < 1) {
        throw std::invalid_argument("config: need 0 <= forecast.origin_burn_in < forecast.origin_iterations");
    }
    return f;
}

nlohmann::ordered_json sampler_json(const SamplerConfig& c) {
    nlohmann::ordered_json j;
    j["scheme"] = to_string(c.scheme);
    j["iterations"] = c.iterations;
    j["burn_in"] = c.burn_in;
    j["thin"] = c.thin;
    j["particles"] = c.particles;
    j["seed"] = c.seed;
    j["adapt_window"] = c.adapt_window;
    j["lkj_shape"] = c.lkj_shape;
    j["initial_tau_omega"] = c.initial_tau_omega;
    j["t_a"] = c.shrinkage.t_a;
    j["t_b"] = c.shrinkage.t_b;
    j["laplace_rate"] = c.shrinkage.laplace_rate;
    j["ridge_variance"] = c.shrinkage.ridge_variance;
    j["mixture_a"] = c.mixture.a;
    j["mixture_b"] = c.mixture.b;
    j["slab_variance"] = c.mixture.slab_variance;
    j["fixed_volatility"] = c.fixed_volatility;
    return j;
}

std::string version_string() { return HSVAR_VERSION; }

void write_manifest(const nlohmann::ordered_json& manifest, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << manifest.dump(2) << '\n';
}

} // namespace hsvar
