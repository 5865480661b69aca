#include "rbdsde/errors.hpp"
#include "rbdsde/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rbdsde;

TEST(TimeGrid, NodesAndIndex) {
    const TimeGrid g(0.5, 1.5, 4);
    EXPECT_DOUBLE_EQ(g.dt(), 0.25);
    EXPECT_DOUBLE_EQ(g.node(0), 0.5);
    EXPECT_DOUBLE_EQ(g.node(4), 1.5);
    EXPECT_EQ(g.node_index(1.0), 2u);
    EXPECT_THROW(g.node_index(0.6), ValidationError);
    EXPECT_THROW(TimeGrid(1.0, 1.0, 4), ValidationError);
    EXPECT_THROW(TimeGrid(0.0, 1.0, 0), ValidationError);
}

TEST(Noise, SameKeyReproducesStream) {
    const TimeGrid g(0.0, 1.0, 64);
    const PathBundle a = sample_bundle(g, 2, 1, 42, 3);
    const PathBundle b = sample_bundle(g, 2, 1, 42, 3);
    EXPECT_EQ(a.w.values, b.w.values);
    EXPECT_EQ(a.b.values, b.b.values);
    const PathBundle c = sample_bundle(g, 2, 1, 42, 4);
    EXPECT_NE(a.b.values, c.b.values);
    const PathBundle e = sample_bundle(g, 2, 1, 43, 3);
    EXPECT_NE(a.w.values, e.w.values);
}

TEST(Noise, IncrementsHaveBrownianMoments) {
    const TimeGrid g(0.0, 2.0, 200000);
    const IncrementTable t = sample_increments(g, 1, 9, NoiseChannel::forward, 0, 0);
    double m = 0.0, v = 0.0;
    for (double x : t.values) m += x;
    m /= static_cast<double>(t.values.size());
    for (double x : t.values) v += x * x;
    v /= static_cast<double>(t.values.size());
    const double dt = g.dt();
    // Mean within 5 standard errors, variance within 5 relative standard errors.
    EXPECT_LT(std::abs(m), 5.0 * std::sqrt(dt / 200000.0));
    EXPECT_NEAR(v / dt, 1.0, 5.0 * std::sqrt(2.0 / 200000.0));
}

TEST(Noise, ForwardAndBackwardChannelsAreUncorrelated) {
    const TimeGrid g(0.0, 1.0, 100000);
    const IncrementTable w = sample_increments(g, 1, 5, NoiseChannel::forward, 0, 0);
    const IncrementTable b = sample_increments(g, 1, 5, NoiseChannel::backward, 0, 0);
    double c = 0.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) c += w.values[i] * b.values[i];
    c /= static_cast<double>(w.values.size()) * g.dt();
    EXPECT_LT(std::abs(c), 5.0 / std::sqrt(100000.0));
}

TEST(Noise, EnsembleSharesBackwardPathAndMatchesBundle) {
    const TimeGrid g(0.0, 1.0, 16);
    const PathEnsemble e = sample_ensemble(g, 2, 1, 10, 7, 2);
    const PathBundle b = sample_bundle(g, 2, 1, 7, 2);
    const PathBundle first = e.bundle(0);
    EXPECT_EQ(first.w.values, b.w.values);
    EXPECT_EQ(first.b.values, b.b.values);
    EXPECT_EQ(e.bundle(5).b.values, b.b.values);
    EXPECT_NE(e.bundle(5).w.values, b.w.values);
    // A larger ensemble extends a smaller one path by path.
    const PathEnsemble big = sample_ensemble(g, 2, 1, 20, 7, 2);
    for (std::size_t p = 0; p < 10; ++p) EXPECT_EQ(big.bundle(p).w.values, e.bundle(p).w.values);
}

TEST(Noise, CoarsenSumsIncrements) {
    const TimeGrid g(0.0, 1.0, 12);
    const PathBundle fine = sample_bundle(g, 1, 2, 1, 0);
    const PathBundle coarse = coarsen(fine, 3);
    ASSERT_EQ(coarse.grid.n_steps(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        double w = 0.0, b0 = 0.0, b1 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            w += fine.w.row(3 * i + k)[0];
            b0 += fine.b.row(3 * i + k)[0];
            b1 += fine.b.row(3 * i + k)[1];
        }
        EXPECT_NEAR(coarse.w.row(i)[0], w, 1e-15);
        EXPECT_NEAR(coarse.b.row(i)[0], b0, 1e-15);
        EXPECT_NEAR(coarse.b.row(i)[1], b1, 1e-15);
    }
    EXPECT_THROW(coarsen(fine, 5), ValidationError);
}

TEST(Noise, BackwardItoUsesRightNodeValues) {
    const TimeGrid g(0.0, 1.0, 8);
    const PathBundle b = sample_bundle(g, 1, 1, 3, 0);
    const auto values = RightNodeSamples::from_nodes(
        8, 1, [](std::size_t node, std::span<double> out) { out[0] = static_cast<double>(node); });
    double expect = 0.0;
    for (std::size_t i = 2; i < 6; ++i) expect += static_cast<double>(i + 1) * b.b.row(i)[0];
    EXPECT_NEAR(backward_ito_integral(values, b, 2, 6), expect, 1e-14);
}

TEST(Noise, StratonovichSumUsesHeunMidpoint) {
    const TimeGrid g(0.0, 1.0, 5);
    const PathBundle b = sample_bundle(g, 1, 1, 4, 0);
    std::vector<double> states{1.0, 1.1, 0.9, 1.3, 1.2, 1.0};
    const StateIntegrand gy = [](double, double y, std::span<double> out) { out[0] = y * y; };
    double expect = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double y = states[i + 1];
        const double pred = y + y * y * b.b.row(i)[0];
        const double mid = 0.5 * (y + pred);
        expect += mid * mid * b.b.row(i)[0];
    }
    EXPECT_NEAR(backward_stratonovich_integral(gy, states, b, 0, 5), expect, 1e-13);
}

TEST(Noise, BundleFileRoundTrip) {
    const TimeGrid g(0.0, 2.0, 10);
    const PathBundle b = sample_bundle(g, 2, 1, 99, 0);
    const auto path = std::filesystem::temp_directory_path() / "rbdsde_bundle_test.bin";
    write_bundle(path, b);
    const PathBundle r = read_bundle(path, 0.0, 2.0);
    EXPECT_EQ(r.w.values, b.w.values);
    EXPECT_EQ(r.b.values, b.b.values);
    EXPECT_EQ(r.seed, 99u);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
    }
    EXPECT_THROW(read_bundle(path, 0.0, 2.0), ValidationError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_bundle(path, 0.0, 2.0), ValidationError);
}
