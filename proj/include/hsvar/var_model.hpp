#pragma once

#include "hsvar/panel.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hsvar {

/// n series, P lags, T usable observations after dropping the first P rows.
struct VarShape {
    int n = 1;
    int lags = 1;
    int T = 1;

    int coefficients_per_equation() const { return n * lags; }
    int coefficient_count() const { return n * n * lags; }
    void validate() const;
};

/// VAR coefficients theta(i, j, k): effect of lag k+1 of series j on
/// series i. Stored flat in (i, j, k) order, so equation i occupies the
/// contiguous block [i*n*P, (i+1)*n*P) and lines up with build_design_row.
class CoefTensor {
public:
    CoefTensor() = default;
    CoefTensor(int n, int lags);
    CoefTensor(int n, int lags, Eigen::VectorXd flat);

    int n() const { return n_; }
    int lags() const { return lags_; }
    int size() const { return static_cast<int>(values_.size()); }
    int index(int i, int j, int k) const { return (i * n_ + j) * lags_ + k; }

    double operator()(int i, int j, int k) const { return values_[index(i, j, k)]; }
    double& operator()(int i, int j, int k) { return values_[index(i, j, k)]; }

    const Eigen::VectorXd& flat() const { return values_; }
    Eigen::VectorXd& flat() { return values_; }

    /// n x (n*P) matrix whose row i holds equation i.
    Eigen::MatrixXd as_matrix() const;
    bool same_shape(const CoefTensor& other) const {
        return n_ == other.n_ && lags_ == other.lags_;
    }

private:
    int n_ = 0;
    int lags_ = 0;
    Eigen::VectorXd values_;
};

/// Stacked regression form: Y (T x n) regressed on lagged design X (T x nP).
struct RegressionData {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    VarShape shape;
};

/// Lagged values for row t (0-based) of a (rows x n) data matrix, ordered
/// (j, k): element j*P + k is y(t - k - 1, j). Requires t >= P.
Eigen::VectorXd build_design_row(const Eigen::MatrixXd& values, int t, int lags);
Eigen::VectorXd build_design_row(const TimeSeriesPanel& panel, int t, int lags);

/// Design and response matrices over rows P..rows-1.
RegressionData make_regression_data(const Eigen::MatrixXd& values, int lags);

Eigen::VectorXd conditional_mean(const CoefTensor& theta, const Eigen::VectorXd& design_row);

/// Per-equation least squares via column-pivoted QR. Throws
/// SingularDesignError when the design lacks full column rank.
CoefTensor fit_ols(const Eigen::MatrixXd& values, int lags);
CoefTensor fit_ols(const TimeSeriesPanel& panel, int lags);
CoefTensor fit_ols(const RegressionData& data);

/// Mean over draws of conditional_mean(draw, design_row).
Eigen::VectorXd forecast_mean(std::span<const CoefTensor> draws, const Eigen::VectorXd& design_row);

double rmsfe(std::span<const double> predictions, std::span<const double> realized);

} // namespace hsvar
