#pragma once

#include <Eigen/Dense>

#include <compare>
#include <string>
#include <vector>

namespace hsvar {

/// Calendar date with day precision; series dates are always the first day
/// of a month or quarter.
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    /// Parses YYYY-MM-DD; throws std::invalid_argument.
    static Date parse(const std::string& text);
    std::string iso() const;
    int quarter() const { return (month - 1) / 3 + 1; }
    /// First day of the quarter containing this date.
    Date quarter_start() const { return Date{year, 3 * (quarter() - 1) + 1, 1}; }
    /// Months since year 0, month 1.
    int month_index() const { return year * 12 + (month - 1); }
};

enum class Transform { level, diff, log, log_diff };

Transform parse_transform(const std::string& code);
std::string to_string(Transform t);

struct Standardization {
    double mean = 0.0;
    double sd = 1.0;
};

/// Aligned multivariate quarterly panel. values is T x n, one column per
/// series, rows ordered by date.
struct TimeSeriesPanel {
    std::vector<std::string> series_ids;
    std::vector<Date> dates;
    Eigen::MatrixXd values;
    std::vector<Transform> transforms;
    /// Empty until standardize() has been applied.
    std::vector<Standardization> standardization;

    int rows() const { return static_cast<int>(values.rows()); }
    int series_count() const { return static_cast<int>(values.cols()); }
    bool standardized() const { return !standardization.empty(); }
    /// Rows [0, count) as a new panel; metadata copied.
    TimeSeriesPanel head(int count) const;
};

} // namespace hsvar
