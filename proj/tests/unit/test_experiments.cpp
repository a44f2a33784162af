#include "hsvar/experiments.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace hsvar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hsvar_exp_" + name);
    fs::remove_all(dir);
    return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// Quarterly panel from a bivariate VAR(1), unstandardized.
TimeSeriesPanel var_panel(int rows, double noise, std::uint64_t seed) {
    Random rng(seed);
    TimeSeriesPanel p;
    p.series_ids = {"A", "B"};
    p.transforms = {Transform::level, Transform::level};
    p.values = Eigen::MatrixXd(rows, 2);
    Eigen::Vector2d y(1.0, -0.5);
    Eigen::Matrix2d A;
    A << 0.6, 0.2, -0.3, 0.5;
    for (int t = 0; t < rows; ++t) {
        y = A * y + noise * Eigen::Vector2d(rng.normal(), rng.normal());
        if (noise == 0.0) y += Eigen::Vector2d(0.3 * std::sin(0.7 * t), 0.0);  // keep the noiseless path alive
        p.values.row(t) = y.transpose();
        p.dates.push_back(Date{1980 + t / 4, 3 * (t % 4) + 1, 1});
    }
    return p;
}

ForecastConfig tiny_forecast(int origins, std::vector<Scheme> schemes) {
    ForecastConfig f;
    f.schemes = std::move(schemes);
    f.lags = 1;
    f.origins = origins;
    f.first.iterations = 150;
    f.first.burn_in = 20;
    f.first.particles = 10;
    f.first.seed = 77;
    f.origin_iterations = 40;
    f.origin_burn_in = 10;
    f.draws = 20;
    return f;
}

} // namespace

TEST(Simulation, DesignNames) {
    EXPECT_EQ(parse_design("1"), Design::sim1);
    EXPECT_EQ(parse_design("sim3"), Design::sim3);
    EXPECT_THROW(parse_design("4"), std::invalid_argument);
}

TEST(Simulation, Sim1ZeroShare) {
    Random rng(1);
    double zeros = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        zeros += (draw_coefficients(Design::sim1, 8, 4, rng).flat().array() == 0.0).count() / 256.0;
    }
    EXPECT_NEAR(zeros / reps, 0.5, 0.05);
    const CoefTensor one = draw_coefficients(Design::sim1, 8, 4, rng);
    EXPECT_NEAR((one.flat().array() == 0.0).count() / 256.0, 0.5, 0.1);

    double sim_zeros = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimulationSpec spec;
        spec.seed = seed;
        sim_zeros += (generate_simulation(spec).theta.flat().array() == 0.0).count() / 256.0;
    }
    EXPECT_NEAR(sim_zeros / 10.0, 0.5, 0.05);
}

TEST(Simulation, Sim1NonzeroLaw) {
    Random rng(2);
    std::vector<double> nonzero;
    for (int r = 0; r < 50; ++r) {
        const CoefTensor th = draw_coefficients(Design::sim1, 8, 4, rng);
        for (Eigen::Index m = 0; m < th.flat().size(); ++m)
            if (th.flat()[m] != 0.0) nonzero.push_back(th.flat()[m]);
    }
    const double d = oracle::ks_statistic(nonzero, [](double x) { return 0.5 * std::erfc(-x / (0.3 * std::sqrt(2.0))); });
    EXPECT_GT(oracle::ks_pvalue(d, nonzero.size()), 0.01);
}

TEST(Simulation, Sim2NormalLaw) {
    Random rng(3);
    std::vector<double> all;
    for (int r = 0; r < 20; ++r) {
        const CoefTensor th = draw_coefficients(Design::sim2, 8, 4, rng);
        all.insert(all.end(), th.flat().data(), th.flat().data() + th.flat().size());
    }
    const double d = oracle::ks_statistic(all, [](double x) { return 0.5 * std::erfc(-x / (0.15 * std::sqrt(2.0))); });
    EXPECT_GT(oracle::ks_pvalue(d, all.size()), 0.01);
}

TEST(Simulation, Sim3MixtureFractions) {
    Random rng(4);
    const int reps = 40;
    const double total = reps * 256.0;
    double small = 0, pos = 0, neg = 0;
    for (int r = 0; r < reps; ++r) {
        const CoefTensor th = draw_coefficients(Design::sim3, 8, 4, rng);
        for (Eigen::Index m = 0; m < th.flat().size(); ++m) {
            const double v = th.flat()[m];
            if (v > 0.3) pos += 1;
            else if (v < -0.3) neg += 1;
            else small += 1;
        }
    }
    // expected cell shares with the component overlap beyond +-0.3 accounted for
    const auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    const double p_pos = 0.8 * (1 - phi(0.3 / 0.15)) + 0.1 * (1 - phi((0.3 - 0.5) / 0.05)) +
                         0.1 * (1 - phi((0.3 + 0.5) / 0.05));
    const double p_neg = p_pos;
    const double p_small = 1 - p_pos - p_neg;
    const auto se = [&](double p) { return std::sqrt(p * (1 - p) / total); };
    EXPECT_NEAR(small / total, p_small, 3 * se(p_small));
    EXPECT_NEAR(pos / total, p_pos, 3 * se(p_pos));
    EXPECT_NEAR(neg / total, p_neg, 3 * se(p_neg));
}

TEST(Simulation, DeterministicAndShaped) {
    SimulationSpec spec;
    spec.seed = 5;
    const Simulation a = generate_simulation(spec);
    const Simulation b = generate_simulation(spec);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.theta.flat(), b.theta.flat());
    EXPECT_EQ(a.values.rows(), 204);
    EXPECT_EQ(a.values.cols(), 8);
    EXPECT_LT(companion_radius(a.theta), 1.0);
    spec.seed = 6;
    EXPECT_NE(generate_simulation(spec).values, a.values);
}

TEST(Simulation, ExplosiveDrawsAreRedrawn) {
    SimulationSpec spec;
    spec.design = Design::sim3;
    spec.seed = 1;
    const Simulation s = generate_simulation(spec);
    EXPECT_GT(s.redraws, 0);
    EXPECT_LE(s.values.cwiseAbs().maxCoeff(), spec.explosive_limit);
    spec.max_redraws = 0;
    spec.seed = 2;
    EXPECT_THROW(generate_simulation(spec), std::runtime_error);
}

TEST(Simulation, CompanionRadius) {
    CoefTensor th(1, 2);
    th(0, 0, 0) = 0.5;
    th(0, 0, 1) = 0.24;  // roots of z^2 - 0.5 z - 0.24: 0.8 and -0.3
    EXPECT_NEAR(companion_radius(th), 0.8, 1e-12);
    CoefTensor diag(2, 1);
    diag(0, 0, 0) = 0.4;
    diag(1, 1, 0) = -1.1;
    EXPECT_NEAR(companion_radius(diag), 1.1, 1e-12);
}

TEST(Forecast, OracleThetaOnNoiselessDataIsExact) {
    const TimeSeriesPanel p = var_panel(40, 0.0, 6);
    Eigen::Matrix2d A;
    A << 0.6, 0.2, -0.3, 0.5;
    CoefTensor truth(2, 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) truth(i, j, 0) = A(i, j);
    // In levels the sin forcing is the only extra term; predict it directly.
    double worst = 0.0;
    for (int t = 20; t < 39; ++t) {
        const std::vector<CoefTensor> draws{truth, truth};
        Eigen::VectorXd x = p.values.row(t).transpose();
        Eigen::Vector2d pred = forecast_mean(draws, x);
        pred[0] += 0.3 * std::sin(0.7 * (t + 1));
        worst = std::max(worst, (pred - p.values.row(t + 1).transpose()).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Forecast, ReportShapesAndRatios) {
    const TimeSeriesPanel p = var_panel(60, 0.5, 7);
    const ForecastConfig cfg = tiny_forecast(4, {Scheme::hs, Scheme::ridge});
    const ForecastReport r = run_forecast_study(p, cfg);
    ASSERT_EQ(r.schemes.size(), 2u);
    EXPECT_EQ(r.realized.rows(), 4);
    EXPECT_EQ(r.target_dates.back(), p.dates.back());
    for (const auto& f : r.schemes) {
        EXPECT_TRUE((f.ratio.array() > 0.0).all());
        EXPECT_NEAR(f.average_ratio, f.ratio.mean(), 1e-15);
        for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(f.ratio[i], f.rmsfe[i] / r.ols_rmsfe[i]);
    }
    // baseline against itself
    for (int i = 0; i < 2; ++i) EXPECT_EQ(r.ols_rmsfe[i] / r.ols_rmsfe[i], 1.0);

    const fs::path dir = scratch("report");
    emit_reports(r, dir, cfg.lags);
    const auto rmsfe = read_csv(dir / "rmsfe.csv");
    ASSERT_EQ(rmsfe.size(), 1u + 2u + 1u);
    EXPECT_EQ(rmsfe[0], (std::vector<std::string>{"series", "hs", "ridge"}));
    EXPECT_EQ(rmsfe.back()[0], "average");
    EXPECT_TRUE(fs::exists(dir / "hs" / "shrinkage_profile_A.csv"));
    fs::remove_all(dir);
}

TEST(Forecast, OlsBaselineRefitsAtEachOrigin) {
    const TimeSeriesPanel p = var_panel(50, 0.5, 8);
    ForecastConfig cfg = tiny_forecast(3, {Scheme::ridge});
    const ForecastReport r = run_forecast_study(p, cfg);
    const int first = first_origin_row(p, cfg);
    for (int o = 0; o < 3; ++o) {
        const TimeSeriesPanel head = standardize(p.head(first + o + 1));
        const CoefTensor ols = fit_ols(head.values, 1);
        const Eigen::VectorXd z = conditional_mean(ols, head.values.row(first + o).transpose());
        for (int i = 0; i < 2; ++i) {
            const auto& s = head.standardization[static_cast<std::size_t>(i)];
            EXPECT_NEAR(r.ols_predictions(o, i), s.mean + s.sd * z[i], 1e-10);
        }
    }
}

TEST(Forecast, NoLookahead) {
    const TimeSeriesPanel full = var_panel(60, 0.5, 9);
    ForecastConfig cfg = tiny_forecast(3, {Scheme::hs, Scheme::dm});
    cfg.first_origin = full.dates[40];
    const ForecastReport a = run_forecast_study(full, cfg);
    const ForecastReport b = run_forecast_study(full.head(44), cfg);
    ASSERT_EQ(b.realized.rows(), 3);
    for (std::size_t s = 0; s < a.schemes.size(); ++s) {
        EXPECT_EQ(a.schemes[s].predictions, b.schemes[s].predictions);
    }
    EXPECT_EQ(a.ols_predictions, b.ols_predictions);
}

TEST(Forecast, InsufficientSampleAtFirstOrigin) {
    const TimeSeriesPanel p = var_panel(12, 0.5, 10);
    ForecastConfig cfg = tiny_forecast(3, {Scheme::ridge});
    cfg.lags = 4;
    EXPECT_THROW(run_forecast_study(p, cfg), std::invalid_argument);
}

TEST(Forecast, OriginSeedsDiffer) {
    EXPECT_NE(origin_seed(1, 150), origin_seed(1, 151));
    EXPECT_NE(origin_seed(1, 150), origin_seed(2, 150));
    EXPECT_EQ(origin_seed(3, 9), origin_seed(3, 9));
}

TEST(Reports, InclusionTableShape) {
    SimulationSpec spec;
    spec.T = 60;
    spec.n = 3;
    spec.lags = 2;
    spec.seed = 3;
    SamplerConfig c;
    c.scheme = Scheme::dm;
    c.iterations = 130;
    c.burn_in = 20;
    c.particles = 10;
    c.seed = 3;
    const SimulationReport r = run_simulation_study(spec, c);
    const fs::path dir = scratch("sim");
    emit_simulation(r, dir);
    const auto inc = read_csv(dir / "inclusion_y1.csv");
    ASSERT_EQ(inc.size(), 1u + 2u);
    EXPECT_EQ(inc[0].size(), 1u + 3u);
    const auto points = read_csv(dir / "shrinkage_points.csv");
    EXPECT_EQ(points.size(), 1u + 18u);
    std::ifstream man(dir / "manifest.json");
    const auto j = nlohmann::json::parse(man);
    EXPECT_EQ(j["seed"].get<std::uint64_t>(), 3u);
    EXPECT_EQ(j["sampler"]["seed"].get<std::uint64_t>(), 3u);
    fs::remove_all(dir);
}

TEST(Config, BundledForecastConfig) {
    const Config c = Config::load(fs::path(HSVAR_DATA_DIR) / "macro.cfg");
    const ForecastConfig f = forecast_config_from(c);
    EXPECT_EQ(f.lags, 4);
    EXPECT_EQ(f.origins, 50);
    EXPECT_EQ(f.first.iterations, 30000);
    EXPECT_EQ(f.first.burn_in, 5000);
    EXPECT_EQ(f.first.thin, 25);
    EXPECT_EQ(f.draws, 1000);
    EXPECT_EQ(f.first.seed, 20140101u);
    ASSERT_TRUE(f.first_origin.has_value());
    EXPECT_EQ(f.first_origin->iso(), "1997-01-01");
    const SamplerConfig s = sampler_config_from(Config::parse("iterations = 10\nburn_in = 2\nridge_variance = 4\n"), {});
    EXPECT_EQ(s.iterations, 10);
    EXPECT_EQ(s.shrinkage.ridge_variance, 4.0);
}
