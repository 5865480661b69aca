#include "rbdsde/errors.hpp"
#include "rbdsde/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rbdsde;

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST(Geometry, BallDefiningFunctionIsSignedDistance) {
    const Domain d = Domain::ball({1.0, -2.0}, 3.0);
    EXPECT_NEAR(defining_function(d, std::vector<double>{1.0, -2.0}), 3.0, 1e-15);
    EXPECT_NEAR(defining_function(d, std::vector<double>{4.0, -2.0}), 0.0, 1e-15);
    EXPECT_NEAR(defining_function(d, std::vector<double>{1.0, 3.0}), -2.0, 1e-15);
}

TEST(Geometry, BallGradientPointsInward) {
    const Domain d = Domain::ball({0.0, 0.0}, 2.0);
    const std::vector<double> x{0.6, 0.8};
    const Point g = defining_gradient(d, x);
    EXPECT_NEAR(g[0], -0.6, 1e-14);
    EXPECT_NEAR(g[1], -0.8, 1e-14);
    const Point at_center = defining_gradient(d, std::vector<double>{0.0, 0.0});
    EXPECT_EQ(at_center[0], 0.0);
    EXPECT_EQ(at_center[1], 0.0);
}

TEST(Geometry, InwardNormalOnBallBoundary) {
    const Domain d = Domain::ball({1.0, 1.0, 1.0}, 2.0);
    const std::vector<double> x{1.0, 3.0, 1.0};
    const Point n = inward_normal(d, x);
    EXPECT_NEAR(n[0], 0.0, 1e-14);
    EXPECT_NEAR(n[1], -1.0, 1e-14);
    EXPECT_NEAR(n[2], 0.0, 1e-14);
}

TEST(Geometry, InwardNormalRejectsInteriorPoints) {
    const Domain d = Domain::ball({0.0}, 1.0);
    EXPECT_THROW(inward_normal(d, std::vector<double>{0.5}), ValidationError);
}

TEST(Geometry, BallProjectionIsRadial) {
    const Domain d = Domain::ball({0.0, 0.0}, 1.0);
    const Projection p = project_to_closure(d, std::vector<double>{3.0, 4.0});
    EXPECT_NEAR(p.point[0], 0.6, 1e-14);
    EXPECT_NEAR(p.point[1], 0.8, 1e-14);
    EXPECT_NEAR(p.displacement, 4.0, 1e-14);
}

TEST(Geometry, InteriorPointsAreNotMoved) {
    const Domain d = Domain::ellipsoid({0.0, 0.0}, {2.0, 1.0});
    const std::vector<double> x{0.3, -0.2};
    const Projection p = project_to_closure(d, x);
    EXPECT_EQ(p.point, Point(x.begin(), x.end()));
    EXPECT_EQ(p.displacement, 0.0);
    EXPECT_TRUE(in_closure(d, x));
    EXPECT_FALSE(in_closure(d, std::vector<double>{2.5, 0.0}));
}

// The closest boundary point of an ellipse, found by brute force over a fine
// angular parametrization, must agree with the projection.
TEST(Geometry, EllipsoidProjectionMatchesBruteForce) {
    const double a = 2.0, b = 0.5;
    const Domain d = Domain::ellipsoid({0.5, -0.25}, {a, b});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x{u(rng), u(rng)};
        if (in_closure(d, x)) continue;
        const Projection p = project_to_closure(d, x);
        double best = 1e300;
        const int n = 200000;
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * std::numbers::pi * k / n;
            const double bx = 0.5 + a * std::cos(th), by = -0.25 + b * std::sin(th);
            best = std::min(best, std::hypot(x[0] - bx, x[1] - by));
        }
        EXPECT_NEAR(p.displacement, best, 1e-6);
        const double q = std::pow((p.point[0] - 0.5) / a, 2) + std::pow((p.point[1] + 0.25) / b, 2);
        EXPECT_NEAR(q, 1.0, 1e-9);
    }
}

TEST(Geometry, EllipsoidNormalIsNormalizedGradientOfQuadraticForm) {
    const Domain d = Domain::ellipsoid({0.0, 0.0}, {3.0, 1.0});
    const double th = 0.7;
    const std::vector<double> x{3.0 * std::cos(th), std::sin(th)};
    // Inward normal of {x^2/9 + y^2 = 1} is -(x/9, y) normalized.
    std::vector<double> expect{-x[0] / 9.0, -x[1]};
    const double len = norm(expect);
    const Point n = inward_normal(d, x);
    EXPECT_NEAR(n[0], expect[0] / len, 1e-10);
    EXPECT_NEAR(n[1], expect[1] / len, 1e-10);
    EXPECT_NEAR(norm(n), 1.0, 1e-14);
}

TEST(Geometry, BoundingBoxAndDiameter) {
    const Domain e = Domain::ellipsoid({1.0, 2.0}, {3.0, 0.5});
    const auto [lo, hi] = e.bounding_box();
    EXPECT_DOUBLE_EQ(lo[0], -2.0);
    EXPECT_DOUBLE_EQ(hi[0], 4.0);
    EXPECT_DOUBLE_EQ(lo[1], 1.5);
    EXPECT_DOUBLE_EQ(hi[1], 2.5);
    EXPECT_DOUBLE_EQ(e.diameter(), 6.0);
    EXPECT_DOUBLE_EQ(Domain::ball({0.0}, 2.0).diameter(), 4.0);
}

TEST(Geometry, RejectsInvalidShapes) {
    EXPECT_THROW(Domain::ball({0.0}, 0.0), ValidationError);
    EXPECT_THROW(Domain::ball({}, 1.0), ValidationError);
    EXPECT_THROW(Domain::ellipsoid({0.0, 0.0}, {1.0}), ValidationError);
    EXPECT_THROW(Domain::ellipsoid({0.0}, {-1.0}), ValidationError);
}

TEST(Geometry, BoundaryToleranceMarksNearBoundaryPoints) {
    Domain d = Domain::ball({0.0}, 1.0);
    d.set_boundary_tolerance(1e-3);
    EXPECT_NO_THROW(inward_normal(d, std::vector<double>{0.9995}));
    EXPECT_THROW(d.set_boundary_tolerance(-1.0), ValidationError);
}
