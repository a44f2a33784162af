#pragma once

#include "hsvar/data.hpp"
#include "hsvar/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hsvar {

enum class Design { sim1, sim2, sim3 };

Design parse_design(const std::string& name);  // "1", "2", "3" or "sim1".."sim3"
std::string to_string(Design d);

struct SimulationSpec {
    Design design = Design::sim1;
    int T = 200;  // regression rows; lags extra rows are simulated in front
    int n = 8;
    int lags = 4;
    double noise_variance = 0.1;
    int warmup = 50;
    double explosive_limit = 1e6;
    int max_redraws = 100000;
    /// Largest companion-matrix spectral radius a draw may have; unset means
    /// the design default (see default_radius_limit).
    std::optional<double> max_spectral_radius;
    std::uint64_t seed = 1;
};

struct Simulation {
    Eigen::MatrixXd values;  // (T + lags) x n
    CoefTensor theta;
    int redraws = 0;
};

/// Coefficients under the design's law:
/// sim1: 0 w.p. 0.5, else N(0, 0.3^2); sim2: N(0, 0.15^2);
/// sim3: N(0, 0.15^2) w.p. 0.8, N(0.5, 0.05^2) w.p. 0.1, N(-0.5, 0.05^2) w.p. 0.1.
CoefTensor draw_coefficients(Design design, int n, int lags, Random& rng);

/// Spectral radius of the VAR companion matrix.
double companion_radius(const CoefTensor& theta);

/// 1 for sim1 and sim2. sim3 draws are essentially never stationary, so it
/// gets +inf and only the path-size check applies.
double default_radius_limit(Design design);

/// Draws theta, runs the VAR from zero lags with N(0, noise_variance I)
/// shocks, drops `warmup` steps. A draw above the radius limit, or whose
/// path has any |y| > explosive_limit, is discarded and theta redrawn from
/// the next substream of the seed.
Simulation generate_simulation(const SimulationSpec& spec);

struct SimulationReport {
    SimulationSpec spec;
    SamplerConfig config;
    Simulation simulation;
    SummaryReport summary;
};

/// Fits `config.scheme` (hs or dm) to a fresh simulation.
SimulationReport run_simulation_study(const SimulationSpec& spec, const SamplerConfig& config,
                                      const std::optional<std::filesystem::path>& store_dir = std::nullopt);

/// |true theta| paired with MAP kappa (shrinkage schemes) or exclusion probability (dm).
std::vector<std::pair<double, double>> shrinkage_pairs(const SimulationReport& report);

struct ForecastConfig {
    std::vector<Scheme> schemes{Scheme::hs, Scheme::dm, Scheme::t, Scheme::lap, Scheme::ridge};
    int lags = 4;
    int origins = 50;
    /// Date of the first forecast origin; default is rows - origins - 1.
    std::optional<Date> first_origin;
    /// Chain settings at the first origin (scheme field ignored).
    SamplerConfig first;
    /// Warm-started chains at later origins.
    int origin_iterations = 3000;
    int origin_burn_in = 500;
    int origin_thin = 1;
    int draws = 1000;
};

struct SchemeForecast {
    Scheme scheme;
    Eigen::MatrixXd predictions;  // origins x n, transformed (unstandardized) units
    Eigen::VectorXd rmsfe;
    Eigen::VectorXd ratio;        // rmsfe / OLS rmsfe
    double average_ratio = 0.0;
    SummaryReport first_origin_summary;
};

struct ForecastReport {
    std::vector<std::string> series_ids;
    std::vector<Date> target_dates;
    Eigen::MatrixXd realized;        // origins x n
    Eigen::MatrixXd ols_predictions;
    Eigen::VectorXd ols_rmsfe;
    std::vector<SchemeForecast> schemes;
};

/// Rolling one-step-ahead study. At each origin the panel is cut at the
/// origin, standardized with constants from that cut only, and fitted;
/// the mean of `draws` evenly spaced retained coefficient draws gives the
/// point forecast. The OLS VAR baseline is refitted at every origin.
ForecastReport run_forecast_study(const TimeSeriesPanel& panel, const ForecastConfig& config);

/// Per-origin chain seed; depends only on the run seed and the origin row.
std::uint64_t origin_seed(std::uint64_t seed, int origin_row);

/// Index of the row at which the first forecast is made.
int first_origin_row(const TimeSeriesPanel& panel, const ForecastConfig& config);

/// rmsfe.csv (series rows plus "average", one ratio column per scheme),
/// predictions.csv and per-scheme shrinkage_profile_<eq>.csv /
/// inclusion_<eq>.csv for the first origin's chain.
void emit_reports(const ForecastReport& report, const std::filesystem::path& dir, int lags);

/// Table-style CSVs for one chain summary: shrinkage_profile_<eq>.csv for
/// shrinkage schemes (kappa histogram and MAP per predictor/lag),
/// inclusion_<eq>.csv for dm (P rows x n predictor columns).
void write_equation_tables(const SummaryReport& summary, const std::filesystem::path& dir,
                           const std::vector<std::string>& series_ids);

/// Simulation outputs: data.csv, shrinkage_points.csv (with the true theta) plus
/// summary and equation tables.
void emit_simulation(const SimulationReport& report, const std::filesystem::path& dir);

/// Sampler settings from `key = value` entries (iterations, burn_in, thin,
/// particles, seed, ...). Unspecified keys keep `defaults`.
SamplerConfig sampler_config_from(const Config& config, const SamplerConfig& defaults);
ForecastConfig forecast_config_from(const Config& config);

/// Sampler settings as JSON for run manifests.
nlohmann::ordered_json sampler_json(const SamplerConfig& config);

/// Version string baked in at build time.
std::string version_string();

/// Writes a JSON manifest; keys in insertion order.
void write_manifest(const nlohmann::ordered_json& manifest, const std::filesystem::path& path);

} // namespace hsvar
