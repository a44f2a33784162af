#include "hsvar/data.hpp"
#include "hsvar/errors.hpp"
#include "hsvar/experiments.hpp"
#include "hsvar/sampler.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hsvar;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

nlohmann::ordered_json config_json(const Config& c) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.entries()) j[k] = v;
    return j;
}

// Optional sample end for fit: keep rows dated on or before it.
TimeSeriesPanel cut_panel(const TimeSeriesPanel& panel, const Config& c) {
    if (!c.has("fit.last_date")) return panel;
    const Date last = Date::parse(c.get("fit.last_date"));
    int rows = 0;
    while (rows < panel.rows() && !(last < panel.dates[static_cast<std::size_t>(rows)])) ++rows;
    return panel.head(rows);
}

int run_simulate(const std::string& design, const std::string& scheme, std::uint64_t seed, int iterations,
                 int burn_in, int particles, const std::string& out, const std::string& store) {
    SimulationSpec spec;
    spec.design = parse_design(design);
    spec.seed = seed;
    SamplerConfig config;
    config.scheme = parse_scheme(scheme);
    config.seed = seed;
    config.iterations = iterations;
    config.burn_in = burn_in;
    config.particles = particles;
    std::optional<std::filesystem::path> store_dir;
    if (!store.empty()) store_dir = store;
    const auto report = run_simulation_study(spec, config, store_dir);
    emit_simulation(report, out);
    return 0;
}

int run_fit(const std::string& scheme, const std::string& config_path, const std::string& out) {
    const Config c = Config::load(config_path);
    SamplerConfig defaults;
    defaults.iterations = 30000;
    defaults.burn_in = 5000;
    defaults.thin = 25;
    SamplerConfig sc = sampler_config_from(c, defaults);
    sc.scheme = parse_scheme(scheme);
    const int lags = c.get_int("lags", 4);

    const TimeSeriesPanel panel = standardize(cut_panel(load_panel(c), c));
    write_panel(panel, std::filesystem::path(out) / "panel.csv");
    const RegressionData data = make_regression_data(panel.values, lags);
    RunOptions options;
    options.store_dir = std::filesystem::path(out) / "chain";
    options.series_ids = panel.series_ids;
    const ChainStore store = run_chain(data, sc, options);
    const SummaryReport summary = summarize(store);
    write_summary(summary, out, panel.series_ids);
    write_equation_tables(summary, out, panel.series_ids);

    nlohmann::ordered_json m;
    m["command"] = "fit";
    m["version"] = version_string();
    m["seed"] = sc.seed;
    m["lags"] = lags;
    m["rows"] = panel.rows();
    m["first_date"] = panel.dates.front().iso();
    m["last_date"] = panel.dates.back().iso();
    m["sampler"] = sampler_json(sc);
    m["config"] = config_json(c);
    write_manifest(m, std::filesystem::path(out) / "manifest.json");
    return 0;
}

int run_forecast(const std::string& schemes, const std::string& config_path, const std::string& out) {
    const Config c = Config::load(config_path);
    ForecastConfig fc = forecast_config_from(c);
    fc.schemes.clear();
    for (const auto& s : split_list(schemes)) fc.schemes.push_back(parse_scheme(s));
    const TimeSeriesPanel panel = load_panel(c);
    const ForecastReport report = run_forecast_study(panel, fc);
    emit_reports(report, out, fc.lags);

    nlohmann::ordered_json m;
    m["command"] = "forecast";
    m["version"] = version_string();
    m["seed"] = fc.first.seed;
    std::vector<std::string> names;
    for (auto s : fc.schemes) names.push_back(to_string(s));
    m["schemes"] = names;
    m["lags"] = fc.lags;
    m["origins"] = report.target_dates.size();
    m["first_target"] = report.target_dates.front().iso();
    m["last_target"] = report.target_dates.back().iso();
    m["first_origin_sampler"] = sampler_json(fc.first);
    m["origin_iterations"] = fc.origin_iterations;
    m["origin_burn_in"] = fc.origin_burn_in;
    m["origin_thin"] = fc.origin_thin;
    m["draws"] = fc.draws;
    m["note"] = "later origins use shortened warm-started chains (origin_iterations / origin_burn_in)";
    m["config"] = config_json(c);
    write_manifest(m, std::filesystem::path(out) / "manifest.json");

    std::cout << "scheme,average_ratio\n";
    for (const auto& f : report.schemes) {
        std::cout << to_string(f.scheme) << ',' << f.average_ratio << '\n';
    }
    return 0;
}

int run_summarize(const std::string& store_dir, std::string out) {
    if (out.empty()) out = store_dir;
    const ChainStore store = ChainStore::read(store_dir);
    if (!store.manifest().complete) {
        std::cerr << "warning: chain is incomplete: " << store.manifest().error << '\n';
    }
    const SummaryReport summary = summarize(store);
    write_summary(summary, out, store.manifest().series_ids);
    write_equation_tables(summary, out, store.manifest().series_ids);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian VAR with horseshoe, discrete mixture and shrinkage priors under stochastic volatility"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string design = "1", scheme = "hs", out, config, schemes = "hs,dm,t,lap,ridge", store, summary_out;
    std::uint64_t seed = 1;
    int iterations = 15000, burn_in = 5000, particles = 100;

    auto* sim = app.add_subcommand("simulate", "simulate a design and fit hs or dm");
    sim->add_option("--design", design, "1, 2 or 3")->check(CLI::IsMember({"1", "2", "3"}));
    sim->add_option("--scheme", scheme, "hs or dm")->check(CLI::IsMember({"hs", "dm"}));
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--out", out, "output directory")->required();
    sim->add_option("--iterations", iterations, "MCMC iterations")->capture_default_str();
    sim->add_option("--burn-in", burn_in, "burn-in iterations")->capture_default_str();
    sim->add_option("--particles", particles, "particles in the conditional filter")->capture_default_str();
    sim->add_option("--store", store, "also keep the chain store in this directory");

    auto* fit = app.add_subcommand("fit", "fit one prior scheme to the configured panel");
    fit->add_option("--scheme", scheme, "hs, dm, t, lap or ridge")
        ->check(CLI::IsMember({"hs", "dm", "t", "lap", "ridge"}))
        ->required();
    fit->add_option("--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out, "output directory")->required();

    auto* fc = app.add_subcommand("forecast", "rolling one-step-ahead forecast study");
    fc->add_option("--schemes", schemes, "comma-separated scheme list")->capture_default_str();
    fc->add_option("--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
    fc->add_option("--out", out, "output directory")->required();

    auto* sum = app.add_subcommand("summarize", "summarize a stored chain");
    sum->add_option("--store", store, "chain store directory")->required()->check(CLI::ExistingDirectory);
    sum->add_option("--out", summary_out, "output directory (default: the store directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(design, scheme, seed, iterations, burn_in, particles, out, store);
        if (*fit) return run_fit(scheme, config, out);
        if (*fc) return run_forecast(schemes, config, out);
        if (*sum) return run_summarize(store, summary_out);
    } catch (const ChainError& e) {
        std::cerr << "error: chain failed at " << e.what() << '\n';
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
