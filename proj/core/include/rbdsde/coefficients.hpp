#pragma once

#include "rbdsde/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rbdsde {

using TerminalFn = std::function<double(std::span<const double> x)>;
using DriverFn =
    std::function<double(double t, std::span<const double> x, double y, std::span<const double> z)>;
using BoundaryFn = std::function<double(double t, std::span<const double> x, double y)>;
using ObstacleFn = std::function<double(double t, std::span<const double> x)>;
using NoiseFn = std::function<void(double t, std::span<const double> x, double y,
                                   std::span<const double> z, std::span<double> out)>;

/// Coefficient g of the backward integral, valued in R^l. An empty `value`
/// means g == 0.
struct NoiseCoefficient {
    std::size_t dim = 1;
    NoiseFn value;
    bool depends_on_z = false;

    bool is_zero() const noexcept { return !value; }

    static NoiseCoefficient zero(std::size_t dim = 1);
    static NoiseCoefficient constant(std::vector<double> gamma);
    /// g(t, x, y, z) = slope * y + z_weight * z_1, l = 1.
    static NoiseCoefficient linear(double slope, double z_weight = 0.0);
};

/// Declared structural constants: Lipschitz bounds c and K, the monotonicity
/// constant beta < 0 of the boundary driver, the z-Lipschitz constant
/// 0 < alpha < 1 of g, and the weight exponent mu.
struct StructuralConstants {
    double c = 1.0;
    double lipschitz = 1.0;
    double beta = -1.0;
    double alpha = 0.5;
    double mu = 0.0;
};

/// Data of a reflected generalized backward doubly stochastic equation:
/// terminal function l, driver f, boundary driver phi (paired with the local
/// time), noise coefficient g and an optional obstacle h.
struct CoefficientSet {
    std::size_t dim = 1;  // state dimension d
    TerminalFn terminal;
    DriverFn driver;      // empty: f == 0
    BoundaryFn boundary;  // empty: phi == 0
    NoiseCoefficient noise;
    ObstacleFn obstacle;  // empty: no obstacle
    StructuralConstants constants;

    bool has_obstacle() const noexcept { return static_cast<bool>(obstacle); }
};

/// Throws ValidationError unless beta < 0, 0 < alpha < 1 and c, K >= 0.
void validate_constants(const StructuralConstants& constants);

struct CoefficientCheck {
    std::size_t samples = 0;
    std::size_t monotonicity_violations = 0;
    double worst_monotonicity_excess = 0.0;
    std::size_t dominance_violations = 0;
    double worst_dominance_excess = 0.0;

    bool ok() const noexcept { return monotonicity_violations == 0 && dominance_violations == 0; }
};

/// Spot checks on random samples of the closure:
/// <y1 - y2, phi(y1) - phi(y2)> <= beta |y1 - y2|^2 + tol (skipped when phi is
/// absent), and h(T, x) <= l(x) + tol when an obstacle is present.
CoefficientCheck check_coefficients(const CoefficientSet& coeffs, const Domain& domain,
                                    double t_end, std::uint64_t seed, std::size_t samples = 256,
                                    double tolerance = 1e-10);

/// Constants and spot checks; throws ValidationError describing the first
/// violated condition.
void validate_coefficients(const CoefficientSet& coeffs, const Domain& domain, double t_end);

}  // namespace rbdsde
