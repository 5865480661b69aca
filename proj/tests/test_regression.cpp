#include "rbdsde/regression.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rbdsde;

namespace {

std::vector<double> uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::vector<double> x(n * d);
    for (double& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST(Regression, ReproducesCubicPolynomials) {
    const std::size_t n = 2000, d = 2;
    const auto x = uniform_points(n, d, 1);
    RegressionBasis basis;
    basis.obstacle_column = false;
    basis.ridge = 0.0;
    const ConditionalExpectation ce(basis, x, d);
    EXPECT_EQ(ce.n_terms(), 10u);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[2 * i], b = x[2 * i + 1];
        y[i] = 1.0 - 2.0 * a + a * b - 0.5 * b * b * b + 0.25 * a * a * b;
    }
    const auto f = ce.fit(y);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(f[i], y[i], 1e-8);
}

TEST(Regression, ConstantTargetIsExact) {
    const auto x = uniform_points(500, 1, 2);
    const ConditionalExpectation ce(RegressionBasis{}, x, 1);
    const std::vector<double> y(500, 3.75);
    for (double v : ce.fit(y)) EXPECT_NEAR(v, 3.75, 1e-13);
}

TEST(Regression, FittedValuesPreserveTheMean) {
    const std::size_t n = 3000;
    const auto x = uniform_points(n, 1, 3);
    const ConditionalExpectation ce(RegressionBasis{}, x, 1);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    std::vector<double> y(n);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::exp(x[i]) + z(rng);
        m += y[i];
    }
    double mf = 0.0;
    for (double v : ce.fit(y)) mf += v;
    EXPECT_NEAR(mf / n, m / n, 1e-12);
}

TEST(Regression, RecoversConditionalMeanFromNoisyTarget) {
    const std::size_t n = 40000;
    const auto x = uniform_points(n, 1, 5);
    const ConditionalExpectation ce(RegressionBasis{}, x, 1);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i] + z(rng);
    const auto f = ce.fit(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(f[i] - x[i] * x[i]));
    EXPECT_LT(worst, 0.1);
}

TEST(Regression, ExtraColumnIsUsed) {
    const std::size_t n = 1000;
    const auto x = uniform_points(n, 1, 7);
    std::vector<double> h(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = std::max(1.0 - x[i], 0.0);
        y[i] = 2.0 * h[i] + x[i];
    }
    RegressionBasis basis;
    basis.ridge = 0.0;
    const ConditionalExpectation with(basis, x, 1, h);
    EXPECT_EQ(with.n_terms(), 5u);
    const auto f = with.fit(y);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(f[i], y[i], 1e-8);
}

TEST(Regression, DegenerateCoordinatesAreDropped) {
    // All samples share the same point: only the constant survives.
    const std::vector<double> x(2 * 100, 0.5);
    const ConditionalExpectation ce(RegressionBasis{}, x, 2);
    EXPECT_EQ(ce.n_terms(), 1u);
    std::vector<double> y(100);
    double m = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        y[i] = static_cast<double>(i);
        m += y[i];
    }
    for (double v : ce.fit(y)) EXPECT_NEAR(v, m / 100.0, 1e-12);
}
