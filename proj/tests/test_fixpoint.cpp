#include "rbdsde/errors.hpp"
#include "rbdsde/fixpoint.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rbdsde;

namespace {

struct Sample {
    PathEnsemble noise;
    ReflectedEnsemble paths;
};

Sample make(std::size_t n, std::uint64_t seed = 1, std::uint64_t stream = 0) {
    const TimeGrid g(0.0, 1.0, 20);
    PathEnsemble e = sample_ensemble(g, 1, 1, n, seed, stream);
    ReflectedEnsemble r = simulate_ensemble(Domain::ball({0.5}, 0.5),
                                            SdeSpec::affine(1, {0.0}, 0.0, 0.5, 0.0),
                                            {0.0, {0.5}}, e);
    return {std::move(e), std::move(r)};
}

CoefficientSet base(NoiseCoefficient g) {
    CoefficientSet c;
    c.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); };
    c.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y; };
    c.boundary = [](double, std::span<const double>, double y) { return -y; };
    c.noise = std::move(g);
    c.constants.c = 0.5;
    c.constants.beta = -1.0;
    return c;
}

}  // namespace

TEST(NormWeights, DerivedFromConstants) {
    StructuralConstants k;
    k.c = 0.5;
    k.alpha = 0.25;
    k.beta = -2.0;
    const NormWeights w = NormWeights::from_constants(k);
    const double ap = 0.625;
    EXPECT_DOUBLE_EQ(w.alpha_prime, ap);
    EXPECT_DOUBLE_EQ(w.c_bar, 0.5 / 0.25);
    EXPECT_DOUBLE_EQ(w.beta_bar, 2.0 / ap);
    EXPECT_DOUBLE_EQ(w.beta, -2.0);
    EXPECT_NEAR(w.mu, ap * 0.5 / 0.25 + 0.5 / (1.0 - ap) + 1.0 - ap, 1e-14);
    EXPECT_DOUBLE_EQ(NormWeights::from_constants(k, 0.5, 3.0).mu, 3.0);
    EXPECT_THROW(NormWeights::from_constants(k, 0.2), ValidationError);
    EXPECT_THROW(NormWeights::from_constants(k, 1.0), ValidationError);
}

TEST(WeightedDistance, IsASquaredSeminorm) {
    const Sample s = make(500);
    const CoefficientSet c = base(NoiseCoefficient::linear(0.2));
    const BackwardSolution a = solve_generalized(c, s.paths, s.noise);
    CoefficientSet c2 = c;
    c2.terminal = [](std::span<const double> x) { return x[0]; };
    const BackwardSolution b = solve_generalized(c2, s.paths, s.noise);
    CoefficientSet c3 = c;
    c3.terminal = [](std::span<const double>) { return 0.3; };
    const BackwardSolution e = solve_generalized(c3, s.paths, s.noise);
    StructuralConstants k;
    const NormWeights w = NormWeights::from_constants(k);
    EXPECT_EQ(weighted_distance(a, a, w, s.paths), 0.0);
    const double ab = weighted_distance(a, b, w, s.paths);
    EXPECT_GT(ab, 0.0);
    EXPECT_DOUBLE_EQ(ab, weighted_distance(b, a, w, s.paths));
    const double ae = std::sqrt(weighted_distance(a, e, w, s.paths));
    const double eb = std::sqrt(weighted_distance(e, b, w, s.paths));
    EXPECT_LE(std::sqrt(ab), ae + eb + 1e-12);
}

TEST(Picard, ContractsForZDependentNoise) {
    const Sample s = make(3000, 5);
    CoefficientSet c = base(NoiseCoefficient::linear(0.3, 0.25));
    c.constants.alpha = 0.25;
    const NormWeights w = NormWeights::from_constants(c.constants, 0.625);
    const PicardResult r = picard_solve(c, s.paths, s.noise, w, 1e-4, 8);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.iterations, 8u);
    EXPECT_DOUBLE_EQ(r.report.predicted_ratio, 0.4);
    EXPECT_FALSE(r.report.contraction_ratios.empty());
    for (double q : r.report.contraction_ratios) EXPECT_LE(q, 0.5);
    EXPECT_LT(r.report.distances.back(), 1e-4);
}

// With g free of the solution the map ignores the previous iterate.
TEST(Picard, NoiseFreeOfSolutionConvergesImmediately) {
    const Sample s = make(1000, 6);
    const CoefficientSet c = base(NoiseCoefficient::constant({0.3}));
    const NormWeights w = NormWeights::from_constants(c.constants);
    const PicardResult r = picard_solve(c, s.paths, s.noise, w, 1e-10, 5);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.iterations, 3u);
    const BackwardSolution direct = solve_generalized(c, s.paths, s.noise);
    for (std::size_t i = 0; i < direct.y_values.size(); ++i) {
        EXPECT_NEAR(r.solution.y_values[i], direct.y_values[i], 1e-9);
    }
}

TEST(Picard, ReportsNonConvergence) {
    const Sample s = make(500, 7);
    CoefficientSet c = base(NoiseCoefficient::linear(0.3, 0.25));
    c.constants.alpha = 0.25;
    const NormWeights w = NormWeights::from_constants(c.constants);
    const PicardResult r = picard_solve(c, s.paths, s.noise, w, 1e-300, 2);
    EXPECT_FALSE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 2u);
    EXPECT_THROW(picard_solve(c, s.paths, s.noise, w, 0.0, 2), ValidationError);
}

TEST(Comparison, OrderedTerminalValuesGiveOrderedSolutions) {
    const Sample s = make(2000, 8);
    const CoefficientSet lower = base(NoiseCoefficient::linear(0.2));
    CoefficientSet upper = lower;
    upper.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5) + 0.3; };
    const ViolationReport ok = comparison_check(lower, upper, s.paths, s.noise);
    EXPECT_EQ(ok.total, 0u);
    EXPECT_LT(ok.worst, 0.0);
    EXPECT_DOUBLE_EQ(ok.threshold, 3.0 * scheme_tolerance(s.paths.grid, 2000));
    // Swapping the roles must be detected.
    const ViolationReport bad = comparison_check(upper, lower, s.paths, s.noise);
    EXPECT_GT(bad.total, 0u);
    EXPECT_GE(bad.worst, 0.3 - 1e-12);  // the terminal node alone differs by 0.3
}

TEST(Comparison, RejectsObstaclesAndDifferentNoise) {
    const Sample s = make(200, 9);
    CoefficientSet a = base(NoiseCoefficient::linear(0.2));
    CoefficientSet b = base(NoiseCoefficient::linear(0.3));
    EXPECT_THROW(comparison_check(a, b, s.paths, s.noise), ValidationError);
    CoefficientSet h = a;
    h.obstacle = [](double, std::span<const double>) { return -10.0; };
    EXPECT_THROW(comparison_check(h, a, s.paths, s.noise), ValidationError);
}
