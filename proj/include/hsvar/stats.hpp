#pragma once

#include <span>
#include <vector>

namespace hsvar::stats {

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator).
double variance(std::span<const double> x);
/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::span<const double> x, double p);
double median(std::span<const double> x);
/// Ranks 1..n with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

} // namespace hsvar::stats
