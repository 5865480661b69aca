#pragma once

#include "rbdsde/coefficients.hpp"
#include "rbdsde/geometry.hpp"
#include "rbdsde/noise.hpp"
#include "rbdsde/reflected_sde.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rbdsde {

/// Sample points of a flow table: a tensor grid in x (one sorted axis per
/// coordinate) and a uniform grid in y. An axis with a single point makes the
/// table constant in that coordinate.
struct FlowSamples {
    std::vector<std::vector<double>> x_axes;
    double y_min = -5.0;
    double y_max = 5.0;
    std::size_t y_points = 201;

    static FlowSamples at_point(std::span<const double> x, double y_min, double y_max,
                                std::size_t y_points);
};

/// eta and its derivatives at one (t, x, y).
struct FlowSample {
    double eta = 0.0;
    double d_y = 1.0;
    double d_yy = 0.0;
    std::vector<double> d_x;   // d
    std::vector<double> d_xy;  // d
    std::vector<double> d_xx;  // d x d, row-major
};

/// Pathwise solution of eta(t, x, y) = y + int_t^T <g(s, x, eta), o dB_s>
/// for one backward path, tabulated on the nodes of the path's grid, together
/// with the first and second derivatives in (x, y).
class FlowField {
public:
    const TimeGrid& grid() const noexcept { return grid_; }
    const FlowSamples& samples() const noexcept { return samples_; }
    std::size_t x_dim() const noexcept { return samples_.x_axes.size(); }
    std::size_t x_count() const noexcept { return x_count_; }
    std::size_t y_count() const noexcept { return samples_.y_points; }
    double y_sample(std::size_t k) const noexcept;
    Point x_sample(std::size_t j) const;
    std::uint64_t b_stream() const noexcept { return b_stream_; }

    /// Tabulated values at node i, x-sample j, y-sample k.
    double eta_at(std::size_t i, std::size_t j, std::size_t k) const { return eta_[index(i, j, k)]; }
    double d_y_at(std::size_t i, std::size_t j, std::size_t k) const { return d_y_[index(i, j, k)]; }
    double d_yy_at(std::size_t i, std::size_t j, std::size_t k) const {
        return d_yy_[index(i, j, k)];
    }
    double min_d_y() const;

    /// Interpolated values: cubic Lagrange in y, multilinear in x, linear in
    /// t. Throws NumericalError outside the tabulated range.
    FlowSample sample(double t, std::span<const double> x, double y) const;
    double eta(double t, std::span<const double> x, double y) const;

    /// y with eta(t, x, y) = v, by bracketed root finding on the interpolant.
    /// Throws NumericalError when v is outside the tabulated image.
    double inverse(double t, std::span<const double> x, double v) const;

private:
    friend FlowField solve_flow(const NoiseCoefficient&, const PathBundle&, const FlowSamples&);

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * x_count_ + j) * samples_.y_points + k;
    }
    void locate_x(std::span<const double> x, std::vector<std::size_t>& lo,
                  std::vector<double>& w) const;

    TimeGrid grid_{0.0, 1.0, 1};
    FlowSamples samples_;
    std::size_t x_count_ = 1;
    std::uint64_t b_stream_ = 0;
    std::vector<double> eta_, d_y_, d_yy_;
    std::vector<double> d_x_, d_xy_;  // per entry: d values
    std::vector<double> d_xx_;        // per entry: d x d values
};

/// Integrates the flow backward from the horizon with one Heun step per
/// backward increment. The variational equations for the derivatives are
/// stepped with the same scheme, so they are the exact derivatives of the
/// discrete flow map (up to the finite differences used for g).
FlowField solve_flow(const NoiseCoefficient& g, const PathBundle& bundle,
                     const FlowSamples& samples);

struct InverseTable {
    std::vector<double> v_samples;
    std::vector<double> values;           // nodes x x-samples x v-samples
    std::vector<std::uint8_t> out_of_range;
};

/// y-inverse of the flow at every tabulated (t, x) and every v sample.
InverseTable invert_flow(const FlowField& field, std::span<const double> v_samples);

/// Coefficients of the equation without backward noise satisfied by
/// v = eps(t, x, u): transformed driver, boundary driver and obstacle. The
/// terminal function is unchanged since the flow is the identity at T.
CoefficientSet transform_coefficients(const CoefficientSet& coeffs, const FlowField& field,
                                      const Domain& domain, const SdeSpec& sde);

/// |Stratonovich sum - backward Ito sum - 1/2 sum <g, D_y g> dt| along the
/// flow started from y0 at the horizon (scalar noise only).
double conversion_residual(const NoiseCoefficient& g, const PathBundle& bundle,
                           std::span<const double> x, double y0);

/// CSV with columns t,x_1..x_d,y,eta,d_eta_dy.
void write_flow_csv(std::ostream& os, const FlowField& field);

}  // namespace rbdsde
