#include "hsvar/var_model.hpp"

#include "hsvar/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsvar {

void VarShape::validate() const {
    if (n < 1 || lags < 1 || T < 1) {
        throw std::invalid_argument("VarShape: n, P and T must all be positive");
    }
}

CoefTensor::CoefTensor(int n, int lags) : n_(n), lags_(lags) {
    if (n < 1 || lags < 1) {
        throw std::invalid_argument("CoefTensor: n and P must be positive");
    }
    values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * n * lags);
}

CoefTensor::CoefTensor(int n, int lags, Eigen::VectorXd flat) : CoefTensor(n, lags) {
    if (flat.size() != values_.size()) {
        throw std::invalid_argument("CoefTensor: flat vector has length " +
                                    std::to_string(flat.size()) + ", expected " +
                                    std::to_string(values_.size()));
    }
    if (!flat.allFinite()) {
        throw std::invalid_argument("CoefTensor: entries must be finite");
    }
    values_ = std::move(flat);
}

Eigen::MatrixXd CoefTensor::as_matrix() const {
    const int width = n_ * lags_;
    Eigen::MatrixXd m(n_, width);
    for (int i = 0; i < n_; ++i) {
        m.row(i) = values_.segment(static_cast<Eigen::Index>(i) * width, width).transpose();
    }
    return m;
}

Eigen::VectorXd build_design_row(const Eigen::MatrixXd& values, int t, int lags) {
    if (lags < 1) {
        throw std::invalid_argument("build_design_row: P must be positive");
    }
    if (t < lags || t >= values.rows()) {
        throw std::out_of_range("build_design_row: row " + std::to_string(t) +
                                " has no complete set of " + std::to_string(lags) + " lags");
    }
    const auto n = static_cast<int>(values.cols());
    Eigen::VectorXd row(static_cast<Eigen::Index>(n) * lags);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < lags; ++k) {
            const double v = values(t - k - 1, j);
            if (!std::isfinite(v)) {
                throw std::invalid_argument("build_design_row: missing value at row " +
                                            std::to_string(t - k - 1) + ", series " +
                                            std::to_string(j));
            }
            row[j * lags + k] = v;
        }
    }
    return row;
}

Eigen::VectorXd build_design_row(const TimeSeriesPanel& panel, int t, int lags) {
    return build_design_row(panel.values, t, lags);
}

RegressionData make_regression_data(const Eigen::MatrixXd& values, int lags) {
    const auto rows = static_cast<int>(values.rows());
    const auto n = static_cast<int>(values.cols());
    if (rows <= lags) {
        throw std::invalid_argument("make_regression_data: need more than P rows");
    }
    RegressionData data;
    data.shape = VarShape{n, lags, rows - lags};
    data.shape.validate();
    data.X.resize(data.shape.T, n * lags);
    data.Y.resize(data.shape.T, n);
    for (int t = lags; t < rows; ++t) {
        data.X.row(t - lags) = build_design_row(values, t, lags).transpose();
        data.Y.row(t - lags) = values.row(t);
    }
    if (!data.Y.allFinite()) {
        throw std::invalid_argument("make_regression_data: response contains missing values");
    }
    return data;
}

Eigen::VectorXd conditional_mean(const CoefTensor& theta, const Eigen::VectorXd& design_row) {
    const int width = theta.n() * theta.lags();
    if (design_row.size() != width) {
        throw std::invalid_argument("conditional_mean: design row has length " +
                                    std::to_string(design_row.size()) + ", expected " +
                                    std::to_string(width));
    }
    Eigen::VectorXd mean(theta.n());
    for (int i = 0; i < theta.n(); ++i) {
        mean[i] = theta.flat().segment(static_cast<Eigen::Index>(i) * width, width).dot(design_row);
    }
    return mean;
}

CoefTensor fit_ols(const Eigen::MatrixXd& values, int lags) {
    return fit_ols(make_regression_data(values, lags));
}

CoefTensor fit_ols(const RegressionData& data) {
    const int lags = data.shape.lags;
    const int width = data.shape.coefficients_per_equation();
    if (data.shape.T < width) {
        throw SingularDesignError("fit_ols: " + std::to_string(data.shape.T) +
                                  " observations for " + std::to_string(width) +
                                  " coefficients per equation");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
    if (qr.rank() < width) {
        throw SingularDesignError("fit_ols: design matrix has rank " + std::to_string(qr.rank()) +
                                  " < " + std::to_string(width));
    }
    const Eigen::MatrixXd B = qr.solve(data.Y);  // (nP) x n, column i = equation i
    CoefTensor theta(data.shape.n, lags);
    for (int i = 0; i < data.shape.n; ++i) {
        theta.flat().segment(static_cast<Eigen::Index>(i) * width, width) = B.col(i);
    }
    return theta;
}

CoefTensor fit_ols(const TimeSeriesPanel& panel, int lags) { return fit_ols(panel.values, lags); }

Eigen::VectorXd forecast_mean(std::span<const CoefTensor> draws, const Eigen::VectorXd& design_row) {
    if (draws.empty()) {
        throw std::invalid_argument("forecast_mean: no draws");
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(draws.front().n());
    for (const auto& draw : draws) {
        if (!draw.same_shape(draws.front())) {
            throw std::invalid_argument("forecast_mean: draws have different shapes");
        }
        total += conditional_mean(draw, design_row);
    }
    return total / static_cast<double>(draws.size());
}

double rmsfe(std::span<const double> predictions, std::span<const double> realized) {
    if (predictions.size() != realized.size()) {
        throw std::invalid_argument("rmsfe: length mismatch");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("rmsfe: empty input");
    }
    double ss = 0.0;
    for (std::size_t t = 0; t < predictions.size(); ++t) {
        const double e = predictions[t] - realized[t];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(predictions.size()));
}

} // namespace hsvar
