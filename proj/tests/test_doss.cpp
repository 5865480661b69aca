#include "rbdsde/doss_sussman.hpp"
#include "rbdsde/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rbdsde;

namespace {

double b_tail(const PathBundle& b, std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < b.grid.n_steps(); ++i) s += b.b.row(i)[0];
    return s;
}

}  // namespace

TEST(DossFlow, LinearNoiseGivesExponentialFlow) {
    const TimeGrid g(0.0, 1.0, 1024);
    const PathBundle b = sample_bundle(g, 1, 1, 3, 0);
    const std::vector<double> x{0.0};
    const FlowField f = solve_flow(NoiseCoefficient::linear(1.0), b, FlowSamples::at_point(x, -2.0, 2.0, 41));
    for (std::size_t i = 0; i <= 1024; i += 64) {
        const double e = std::exp(b_tail(b, i));
        for (std::size_t k = 0; k < f.y_count(); ++k) {
            const double y = f.y_sample(k);
            EXPECT_NEAR(f.eta_at(i, 0, k), y * e, 5e-3 * std::abs(y) * e + 1e-14);
            EXPECT_NEAR(f.d_y_at(i, 0, k), e, 5e-3 * e);
            EXPECT_NEAR(f.d_yy_at(i, 0, k), 0.0, 1e-6);
        }
    }
    EXPECT_GT(f.min_d_y(), 0.0);
}

TEST(DossFlow, ConstantNoiseShiftsByBackwardIncrement) {
    const TimeGrid g(0.0, 1.0, 50);
    const PathBundle b = sample_bundle(g, 1, 1, 4, 0);
    const std::vector<double> x{0.2};
    const FlowField f = solve_flow(NoiseCoefficient::constant({0.7}), b, FlowSamples::at_point(x, -1.0, 1.0, 21));
    for (std::size_t i = 0; i <= 50; ++i) {
        for (std::size_t k = 0; k < f.y_count(); ++k) {
            EXPECT_NEAR(f.eta_at(i, 0, k), f.y_sample(k) + 0.7 * b_tail(b, i), 1e-12);
            EXPECT_NEAR(f.d_y_at(i, 0, k), 1.0, 1e-12);
        }
    }
    EXPECT_NEAR(f.inverse(0.0, x, 0.3 + 0.7 * b_tail(b, 0)), 0.3, 1e-10);
}

// g(x, y) = x y has the exact Stratonovich flow y exp(x (B_T - B_t)), whose
// x-derivatives are known in closed form.
TEST(DossFlow, StateDependentNoiseDerivatives) {
    NoiseCoefficient g;
    g.dim = 1;
    g.value = [](double, std::span<const double> x, double y, std::span<const double>, std::span<double> out) {
        out[0] = x[0] * y;
    };
    const TimeGrid tg(0.0, 1.0, 2048);
    const PathBundle b = sample_bundle(tg, 1, 1, 5, 0);
    FlowSamples s;
    s.x_axes = {{0.2, 0.5, 0.8}};
    s.y_min = 0.5;
    s.y_max = 1.5;
    s.y_points = 11;
    const FlowField f = solve_flow(g, b, s);
    const std::vector<double> x{0.5};
    const double db = b_tail(b, 0);
    const FlowSample v = f.sample(0.0, x, 1.0);
    const double e = std::exp(0.5 * db);
    EXPECT_NEAR(v.eta, e, 2e-3 * e);
    EXPECT_NEAR(v.d_y, e, 2e-3 * e);
    EXPECT_NEAR(v.d_x[0], db * e, 2e-3 * e + 1e-3);
    EXPECT_NEAR(v.d_xy[0], db * e, 2e-3 * e + 1e-3);
    EXPECT_NEAR(v.d_xx[0], db * db * e, 1e-2 * (1.0 + db * db * e));
}

TEST(DossFlow, InverseRoundTrip) {
    const TimeGrid g(0.0, 1.0, 512);
    const PathBundle b = sample_bundle(g, 1, 1, 6, 0);
    const std::vector<double> x{0.0};
    const FlowField f = solve_flow(NoiseCoefficient::linear(0.8), b, FlowSamples::at_point(x, -3.0, 3.0, 61));
    double worst = 0.0;
    for (std::size_t i = 0; i <= 512; i += 32) {
        for (std::size_t k = 0; k < f.y_count(); ++k) {
            worst = std::max(worst, std::abs(f.inverse(g.node(i), x, f.eta_at(i, 0, k)) - f.y_sample(k)));
        }
    }
    EXPECT_LT(worst, 1e-8);
    const InverseTable t = invert_flow(f, std::vector<double>{0.0, 0.5, 1e6});
    EXPECT_EQ(t.values.size(), 513u * 3u);
    EXPECT_EQ(t.out_of_range[2], 1u);
    EXPECT_EQ(t.out_of_range[0], 0u);
}

TEST(DossFlow, OutOfRangeQueriesThrow) {
    const TimeGrid g(0.0, 1.0, 16);
    const std::vector<double> x{0.0};
    const FlowField f = solve_flow(NoiseCoefficient::linear(0.5), sample_bundle(g, 1, 1, 1, 0),
                                   FlowSamples::at_point(x, -1.0, 1.0, 11));
    EXPECT_THROW(f.sample(0.0, x, 2.0), NumericalError);
    EXPECT_THROW(f.inverse(0.0, x, 1e3), NumericalError);
    EXPECT_THROW(solve_flow(NoiseCoefficient::linear(0.5, 0.1), sample_bundle(g, 1, 1, 1, 0),
                            FlowSamples::at_point(x, -1.0, 1.0, 11)),
                 ValidationError);
}

TEST(DossTransform, ConstantNoiseShiftsDriverAndObstacle) {
    const TimeGrid g(0.0, 1.0, 20);
    const PathBundle b = sample_bundle(g, 1, 1, 7, 0);
    const Domain d = Domain::ball({0.0}, 1.0);
    const SdeSpec sde = SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0);
    FlowSamples s;
    s.x_axes = {{-1.0, 0.0, 1.0}};
    s.y_min = -6.0;
    s.y_max = 6.0;
    s.y_points = 121;
    const double gamma = 0.5;
    const FlowField f = solve_flow(NoiseCoefficient::constant({gamma}), b, s);
    CoefficientSet c;
    c.terminal = [](std::span<const double> x) { return x[0]; };
    c.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y; };
    c.boundary = [](double, std::span<const double>, double y) { return -y; };
    c.obstacle = [](double, std::span<const double>) { return -3.0; };
    c.noise = NoiseCoefficient::constant({gamma});
    const CoefficientSet t = transform_coefficients(c, f, d, sde);
    EXPECT_TRUE(t.noise.is_zero());
    const std::vector<double> x{0.3}, z{0.2};
    for (std::size_t i : {0u, 7u, 20u}) {
        const double shift = gamma * b_tail(b, i);
        const double tt = g.node(i);
        EXPECT_NEAR(t.driver(tt, x, 0.4, z), -0.5 * (0.4 + shift), 1e-9);
        EXPECT_NEAR(t.boundary(tt, std::vector<double>{1.0}, 0.4), -(0.4 + shift), 1e-9);
        EXPECT_NEAR(t.obstacle(tt, x), -3.0 - shift, 1e-9);
    }
}

TEST(DossConversion, ResidualShrinksWithStepSize) {
    const TimeGrid fine(0.0, 1.0, 4096);
    const std::vector<double> x{0.0};
    double coarse_sum = 0.0, fine_sum = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) {
        const PathBundle b = sample_bundle(fine, 1, 1, 11, s);
        coarse_sum += conversion_residual(NoiseCoefficient::linear(1.0), coarsen(b, 16), x, 1.5);
        fine_sum += conversion_residual(NoiseCoefficient::linear(1.0), b, x, 1.5);
    }
    EXPECT_LT(fine_sum, coarse_sum);
    // For constant g the correction term vanishes and both sums agree exactly.
    const PathBundle b = sample_bundle(fine, 1, 1, 12, 0);
    EXPECT_NEAR(conversion_residual(NoiseCoefficient::constant({0.3}), b, x, 1.0), 0.0, 1e-12);
}
