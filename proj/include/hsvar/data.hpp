#pragma once

#include "hsvar/panel.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hsvar {

/// One series as read from a DATE,VALUE file. Missing observations are NaN.
struct RawSeries {
    std::string id;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

enum class Aggregation { mean, last };

Aggregation parse_aggregation(const std::string& name);
std::string to_string(Aggregation a);

/// Reads a two-column `DATE,VALUE` CSV. `.` or an empty field marks a missing
/// value. Throws ParseError (with line number) on malformed rows or an empty file.
RawSeries load_csv(const std::filesystem::path& path, const std::string& series_id);

/// Collapses monthly observations to quarters (dated at quarter start).
/// Quarterly input is returned unchanged. An incomplete final quarter is
/// dropped with a warning on stderr; incomplete interior quarters are errors.
RawSeries to_quarterly(const RawSeries& series, Aggregation method = Aggregation::mean);

/// level, diff, log, log_diff. Differenced codes drop the first observation.
/// Log codes throw std::domain_error naming the series and date of the first
/// non-positive value.
RawSeries apply_transform(const RawSeries& series, Transform code);

/// Trims every series to the common dated support and stacks them. Leading
/// and trailing missing values are trimmed; an interior gap is an error.
TimeSeriesPanel align(const std::vector<RawSeries>& series, const std::vector<Transform>& transforms);

/// Sample mean and unit sample sd (T - 1 denominator) per column.
std::vector<Standardization> standardization_constants(const Eigen::MatrixXd& values);

/// Centres and scales each column; throws on a zero-variance column.
TimeSeriesPanel standardize(const TimeSeriesPanel& panel);
/// Standardizes with externally computed constants (rolling origins).
TimeSeriesPanel standardize(const TimeSeriesPanel& panel, const std::vector<Standardization>& constants);
TimeSeriesPanel inverse_standardize(const TimeSeriesPanel& panel);

/// Writes `date,<series...>` CSV plus `<path>.json` with transform codes and
/// standardization constants.
void write_panel(const TimeSeriesPanel& panel, const std::filesystem::path& path);

/// Default transform for a handful of common FRED identifiers.
std::optional<Transform> default_transform(const std::string& series_id);

/// Plain-text `key = value` configuration. `#` starts a comment.
class Config {
public:
    Config() = default;
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::filesystem::path& base_dir = ".");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    /// Relative paths resolve against the config file's directory.
    std::filesystem::path get_path(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& entries() const { return values_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_ = ".";
};

/// Reads `series` (comma list) and per-series `<id>.file`, `<id>.transform`,
/// `<id>.aggregation` keys, then loads, aggregates, transforms and aligns.
/// The result is not standardized.
TimeSeriesPanel load_panel(const Config& config);

} // namespace hsvar
