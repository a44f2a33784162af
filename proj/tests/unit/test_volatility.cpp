#include "hsvar/errors.hpp"
#include "hsvar/volatility.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace hsvar;

namespace {

Eigen::MatrixXd random_correlation(int n, Random& rng) {
    Eigen::VectorXd u(n * (n - 1) / 2);
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = 0.8 * rng.normal();
    return unconstrained_to_correlation(u, n);
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return x[x.size() / 2];
}

// Posterior median of tau under half-Cauchy(0, 1) x prod N(d_t; 0, tau^2),
// by quadrature on a log grid, restricted to tau >= floor.
double tau_median_quadrature(double ss, int increments) {
    const int grid = 200001;
    const double lo = std::log(kTauOmegaFloor);
    const double hi = std::log(50.0);
    const double h = (hi - lo) / (grid - 1);
    std::vector<double> logp(grid);
    double top = -1e300;
    for (int g = 0; g < grid; ++g) {
        const double u = lo + g * h;
        const double tau = std::exp(u);
        // density in tau times dtau/du = tau
        logp[g] = -std::log(1.0 + tau * tau) - increments * u - 0.5 * ss / (tau * tau) + u;
        top = std::max(top, logp[g]);
    }
    double total = 0.0;
    for (double& v : logp) {
        v = std::exp(v - top);
        total += v;
    }
    double cum = 0.0;
    for (int g = 0; g < grid; ++g) {
        cum += logp[g];
        if (cum >= 0.5 * total) return std::exp(lo + g * h);
    }
    return std::exp(hi);
}

} // namespace

TEST(AssembleOmega, ZeroLogVolIdentityPsi) {
    const VolatilityState vol = VolatilityState::constant(3, 4);
    EXPECT_TRUE(assemble_omega_t(vol, 2).isApprox(Eigen::MatrixXd::Identity(3, 3), 0.0));
}

TEST(AssembleOmega, TwoByTwoExample) {
    VolatilityState vol = VolatilityState::constant(2, 1);
    vol.omega(0, 0) = std::log(2.0);
    vol.psi(0, 1) = vol.psi(1, 0) = 0.5;
    Eigen::Matrix2d expected;
    expected << 4, 1, 1, 1;
    EXPECT_LT((assemble_omega_t(vol, 0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AssembleOmega, MatchesDenseProduct) {
    Random rng(4);
    VolatilityState vol = VolatilityState::constant(4, 6);
    for (int i = 0; i < 4; ++i)
        for (int t = 0; t < 6; ++t) vol.omega(i, t) = 0.5 * rng.normal();
    vol.psi = random_correlation(4, rng);
    for (int t = 0; t < 6; ++t) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
        for (int i = 0; i < 4; ++i) D(i, i) = std::exp(vol.omega(i, t));
        const Eigen::MatrixXd dense = D * vol.psi * D;
        const Eigen::MatrixXd got = assemble_omega_t(vol, t);
        EXPECT_LT((got - dense).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((got - got.transpose()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(got).eigenvalues().minCoeff(), 0.0);
    }
}

TEST(AssembleOmega, OverflowIsAnError) {
    VolatilityState vol = VolatilityState::constant(2, 3);
    vol.omega(1, 2) = 301.0;
    EXPECT_THROW(assemble_omega_t(vol, 2), NumericalError);
    EXPECT_NO_THROW(assemble_omega_t(vol, 1));
    EXPECT_THROW(assemble_omega_t(vol, 3), std::out_of_range);
}

TEST(Lkj, Examples) {
    Random rng(8);
    const Eigen::MatrixXd psi = random_correlation(3, rng);
    EXPECT_EQ(lkj_log_density(psi, 1.0), 0.0);
    for (double m : {0.5, 1.0, 3.0, 10.0}) {
        EXPECT_EQ(lkj_log_density(Eigen::MatrixXd::Identity(4, 4), m), 0.0);
    }
    Eigen::Matrix2d p;
    p << 1, 0.6, 0.6, 1;
    EXPECT_NEAR(lkj_log_density(p, 3.0), 2.0 * std::log(0.64), 1e-12);
}

TEST(Lkj, PermutationInvariant) {
    Random rng(9);
    const Eigen::MatrixXd psi = random_correlation(4, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.indices() << 2, 0, 3, 1;
    const Eigen::MatrixXd permuted = perm * psi * perm.transpose();
    EXPECT_NEAR(lkj_log_density(permuted, 2.5), lkj_log_density(psi, 2.5), 1e-12);
}

TEST(Lkj, RejectsInvalid) {
    Eigen::Matrix2d p;
    p << 1, 1.2, 1.2, 1;
    EXPECT_THROW(lkj_log_density(p, 2.0), std::domain_error);
    p << 2, 0.1, 0.1, 1;
    EXPECT_THROW(lkj_log_density(p, 2.0), std::domain_error);
}

TEST(CorrelationCoordinates, RoundTrip) {
    Random rng(10);
    for (int n : {2, 3, 5}) {
        const Eigen::MatrixXd psi = random_correlation(n, rng);
        EXPECT_TRUE(is_correlation_matrix(psi));
        const Eigen::VectorXd u = correlation_to_unconstrained(psi);
        EXPECT_EQ(u.size(), n * (n - 1) / 2);
        EXPECT_LT((unconstrained_to_correlation(u, n) - psi).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CorrelationCoordinates, JacobianMatchesFiniteDifferenceForTwoByTwo) {
    // n=2: psi12 = tanh(u), |d psi12 / du| = 1 - tanh(u)^2
    for (double u : {-1.3, 0.0, 0.4}) {
        double lj = 0.0;
        Eigen::VectorXd v(1);
        v << u;
        unconstrained_to_correlation(v, 2, &lj);
        EXPECT_NEAR(lj, std::log(1.0 - std::tanh(u) * std::tanh(u)), 1e-12);
    }
}

TEST(SamplePsi, ZeroStepLeavesPsi) {
    Random rng(1);
    VolatilityState vol = VolatilityState::constant(3, 20);
    vol.psi = random_correlation(3, rng);
    const Eigen::MatrixXd before = vol.psi;
    Eigen::MatrixXd eps(20, 3);
    for (int t = 0; t < 20; ++t)
        for (int i = 0; i < 3; ++i) eps(t, i) = rng.normal();
    EXPECT_TRUE(sample_psi(eps, vol, 1.0, 0.0, rng));
    EXPECT_EQ(vol.psi, before);
}

TEST(SamplePsi, NoDataGivesUniformCorrelation) {
    Random rng(2);
    VolatilityState vol = VolatilityState::constant(2, 0);
    const Eigen::MatrixXd none(0, 2);
    std::vector<double> draws;
    for (int it = 0; it < 200000; ++it) {
        sample_psi(none, vol, 1.0, 1.5, rng);
        if (it % 50 == 49) draws.push_back(vol.psi(0, 1));
    }
    const double d = oracle::ks_statistic(draws, [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); });
    EXPECT_GT(oracle::ks_pvalue(d, draws.size()), 0.01);
}

TEST(SamplePsi, RecoversStrongCorrelation) {
    Random rng(3);
    const int T = 500;
    Eigen::MatrixXd eps(T, 2);
    for (int t = 0; t < T; ++t) {
        const double a = rng.normal();
        const double b = rng.normal();
        eps(t, 0) = a;
        eps(t, 1) = 0.8 * a + 0.6 * b;
    }
    VolatilityState vol = VolatilityState::constant(2, T);
    double sum = 0.0;
    int count = 0;
    for (int it = 0; it < 6000; ++it) {
        sample_psi(eps, vol, 1.0, 0.1, rng);
        if (it >= 1000) {
            sum += vol.psi(0, 1);
            ++count;
        }
    }
    EXPECT_NEAR(sum / count, 0.8, 0.1);
}

TEST(SamplePsi, ResultStaysValid) {
    Random rng(5);
    VolatilityState vol = VolatilityState::constant(4, 30);
    Eigen::MatrixXd eps(30, 4);
    for (int t = 0; t < 30; ++t)
        for (int i = 0; i < 4; ++i) eps(t, i) = rng.normal();
    for (int it = 0; it < 500; ++it) {
        sample_psi(eps, vol, 1.0, 0.8, rng);
        ASSERT_TRUE(is_correlation_matrix(vol.psi));
    }
}

TEST(SampleTauOmega, ConstantPathConcentratesNearZero) {
    Random rng(6);
    const Eigen::MatrixXd omega = Eigen::MatrixXd::Constant(1, 200, 0.3);
    Eigen::VectorXd tau = Eigen::VectorXd::Constant(1, 0.1);
    const Eigen::VectorXd step = Eigen::VectorXd::Constant(1, 1.0);
    std::vector<double> draws;
    for (int it = 0; it < 20000; ++it) {
        sample_tau_omega(omega, tau, step, rng);
        if (it >= 2000) draws.push_back(tau[0]);
        ASSERT_GE(tau[0], kTauOmegaFloor);
    }
    EXPECT_LT(median(draws), 0.05);
    EXPECT_LT(tau_median_quadrature(0.0, 199), 0.05);
}

TEST(SampleTauOmega, MatchesQuadratureMedian) {
    Random rng(7);
    const int T = 200;
    Eigen::MatrixXd omega(1, T);
    omega(0, 0) = 0.0;
    double ss = 0.0;
    for (int t = 1; t < T; ++t) {
        const double d = 0.3 * rng.normal();
        omega(0, t) = omega(0, t - 1) + d;
        ss += d * d;
    }
    Eigen::VectorXd tau = Eigen::VectorXd::Constant(1, 0.1);
    const Eigen::VectorXd step = Eigen::VectorXd::Constant(1, 0.15);
    std::vector<double> draws;
    for (int it = 0; it < 40000; ++it) {
        sample_tau_omega(omega, tau, step, rng);
        if (it >= 2000) draws.push_back(tau[0]);
    }
    const double exact = tau_median_quadrature(ss, T - 1);
    const double got = median(draws);
    EXPECT_GT(got, 0.2);
    EXPECT_LT(got, 0.4);
    EXPECT_NEAR(got, exact, 0.005);
}

TEST(SampleTauOmega, ZeroStepLeavesState) {
    Random rng(8);
    Eigen::MatrixXd omega(2, 50);
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 50; ++t) omega(i, t) = rng.normal();
    Eigen::VectorXd tau(2);
    tau << 0.2, 0.7;
    const Eigen::VectorXd before = tau;
    const auto accepted = sample_tau_omega(omega, tau, Eigen::VectorXd::Zero(2), rng);
    EXPECT_EQ(tau, before);
    EXPECT_TRUE(accepted[0] && accepted[1]);
}

TEST(SampleTauOmega, LogTargetMatchesDirectFormula) {
    // half-Cauchy(0,1) density on tau times Jacobian tau, times the increments
    const double ss = 3.7;
    const int k = 40;
    for (double tau : {0.05, 0.3, 2.0}) {
        const double direct = std::log(2.0 / std::numbers::pi / (1.0 + tau * tau)) + std::log(tau) +
                              k * oracle::normal_log_pdf(0.0, 0.0, tau * tau) - 0.5 * ss / (tau * tau) +
                              0.5 * k * std::log(2.0 * std::numbers::pi);
        EXPECT_NEAR(tau_omega_log_target(std::log(tau), ss, k), direct, 1e-10);
    }
}

TEST(VolatilityState, Validation) {
    VolatilityState vol = VolatilityState::constant(2, 5);
    EXPECT_NO_THROW(vol.validate());
    vol.tau_omega[1] = 0.0;
    EXPECT_THROW(vol.validate(), std::invalid_argument);
    vol = VolatilityState::constant(2, 5);
    vol.psi(0, 1) = 0.3;
    EXPECT_THROW(vol.validate(), std::invalid_argument);
}
