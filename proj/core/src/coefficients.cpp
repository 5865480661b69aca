#include "rbdsde/coefficients.hpp"

#include "rbdsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rbdsde {

NoiseCoefficient NoiseCoefficient::zero(std::size_t dim) { return NoiseCoefficient{dim, {}, false}; }

NoiseCoefficient NoiseCoefficient::constant(std::vector<double> gamma) {
    if (gamma.empty()) throw ValidationError("constant noise coefficient needs l >= 1 entries");
    const std::size_t dim = gamma.size();
    return NoiseCoefficient{dim,
                            [gamma = std::move(gamma)](double, std::span<const double>, double,
                                                       std::span<const double>, std::span<double> out) {
                                std::copy(gamma.begin(), gamma.end(), out.begin());
                            },
                            false};
}

NoiseCoefficient NoiseCoefficient::linear(double slope, double z_weight) {
    return NoiseCoefficient{1,
                            [slope, z_weight](double, std::span<const double>, double y,
                                              std::span<const double> z, std::span<double> out) {
                                out[0] = slope * y + (z.empty() ? 0.0 : z_weight * z[0]);
                            },
                            z_weight != 0.0};
}

void validate_constants(const StructuralConstants& k) {
    if (!(k.beta < 0.0)) {
        throw ValidationError("constant beta must be negative (got " + std::to_string(k.beta) + ")");
    }
    if (!(k.alpha > 0.0 && k.alpha < 1.0)) {
        throw ValidationError("constant alpha must satisfy 0 < alpha < 1 (got " +
                              std::to_string(k.alpha) + ")");
    }
    if (!(k.c >= 0.0) || !(k.lipschitz >= 0.0)) {
        throw ValidationError("Lipschitz constants c and K must be nonnegative");
    }
    if (!std::isfinite(k.mu)) throw ValidationError("weight exponent mu must be finite");
}

CoefficientCheck check_coefficients(const CoefficientSet& coeffs, const Domain& domain,
                                    double t_end, std::uint64_t seed, std::size_t samples,
                                    double tolerance) {
    if (!coeffs.terminal) throw ValidationError("coefficient set has no terminal function");
    CoefficientCheck report;
    report.samples = samples;
    std::mt19937_64 engine(seed);
    const auto [lo, hi] = domain.bounding_box();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 2.0);
    const std::size_t d = domain.dimension();
    Point x(d);
    std::size_t drawn = 0;
    while (drawn < samples) {
        for (std::size_t k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unit(engine);
        if (!in_closure(domain, x)) continue;
        ++drawn;
        const double t = t_end * unit(engine);
        if (coeffs.boundary) {
            const double y1 = normal(engine);
            const double y2 = normal(engine);
            const double lhs = (y1 - y2) * (coeffs.boundary(t, x, y1) - coeffs.boundary(t, x, y2));
            const double excess = lhs - coeffs.constants.beta * (y1 - y2) * (y1 - y2);
            if (excess > tolerance) {
                ++report.monotonicity_violations;
                report.worst_monotonicity_excess = std::max(report.worst_monotonicity_excess, excess);
            }
        }
        if (coeffs.obstacle) {
            const double excess = coeffs.obstacle(t_end, x) - coeffs.terminal(x);
            if (excess > tolerance) {
                ++report.dominance_violations;
                report.worst_dominance_excess = std::max(report.worst_dominance_excess, excess);
            }
        }
    }
    return report;
}

void validate_coefficients(const CoefficientSet& coeffs, const Domain& domain, double t_end) {
    validate_constants(coeffs.constants);
    if (coeffs.dim != domain.dimension()) {
        throw ValidationError("coefficient dimension does not match domain dimension");
    }
    const auto check = check_coefficients(coeffs, domain, t_end, 0x5eed);
    if (check.monotonicity_violations > 0) {
        throw ValidationError("boundary driver violates monotonicity with beta = " +
                              std::to_string(coeffs.constants.beta) + " (worst excess " +
                              std::to_string(check.worst_monotonicity_excess) + ")");
    }
    if (check.dominance_violations > 0) {
        throw ValidationError("obstacle exceeds terminal value at the horizon (worst excess " +
                              std::to_string(check.worst_dominance_excess) + ")");
    }
}

}  // namespace rbdsde
