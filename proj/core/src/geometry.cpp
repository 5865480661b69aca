#include "rbdsde/geometry.hpp"

#include "rbdsde/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace rbdsde {
namespace {

void require_finite(std::span<const double> x, std::size_t dim) {
    if (x.size() != dim) {
        throw ValidationError("point has dimension " + std::to_string(x.size()) +
                              ", domain has dimension " + std::to_string(dim));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("point has non-finite coordinate");
    }
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

// |D^{-1}(x - c)| for an ellipsoid.
double scaled_radius(const Ellipsoid& e, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - e.center[i]) / e.semi_axes[i];
        s += u * u;
    }
    return std::sqrt(s);
}

double min_axis(const Ellipsoid& e) {
    return *std::min_element(e.semi_axes.begin(), e.semi_axes.end());
}

// Closest point on the ellipsoid surface to an exterior point. The closest
// point has the form y_i = c_i + a_i^2 (x_i - c_i) / (a_i^2 + lambda) with
// lambda >= 0 the root of sum_i a_i^2 (x_i - c_i)^2 / (a_i^2 + lambda)^2 = 1.
Point ellipsoid_closest_point(const Ellipsoid& e, std::span<const double> x) {
    const std::size_t d = x.size();
    auto constraint = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double a2 = e.semi_axes[i] * e.semi_axes[i];
            const double q = e.semi_axes[i] * (x[i] - e.center[i]) / (a2 + lambda);
            s += q * q;
        }
        return s - 1.0;
    };
    double dist = 0.0;
    for (std::size_t i = 0; i < d; ++i) dist += (x[i] - e.center[i]) * (x[i] - e.center[i]);
    dist = std::sqrt(dist);
    const double a_max = *std::max_element(e.semi_axes.begin(), e.semi_axes.end());
    double hi = a_max * dist;
    // constraint(0) > 0 for exterior points; constraint(hi) <= 0.
    std::uintmax_t max_iter = 200;
    const auto tol = [](double a, double b) {
        return std::abs(b - a) <= 1e-12 * std::max(std::abs(a), std::abs(b)) + 1e-300;
    };
    double lambda = 0.0;
    const double f0 = constraint(0.0);
    if (f0 > 0.0) {
        double fhi = constraint(hi);
        if (fhi > 0.0) throw NumericalError("ellipsoid projection: failed to bracket multiplier");
        if (fhi == 0.0) {
            lambda = hi;
        } else {
            auto [lo_r, hi_r] = boost::math::tools::toms748_solve(constraint, 0.0, hi, f0, fhi,
                                                                  tol, max_iter);
            lambda = 0.5 * (lo_r + hi_r);
        }
    }
    Point y(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double a2 = e.semi_axes[i] * e.semi_axes[i];
        y[i] = e.center[i] + a2 * (x[i] - e.center[i]) / (a2 + lambda);
    }
    // Snap onto the surface to remove the residual of the root find.
    const double r = scaled_radius(e, y);
    if (r > 0.0) {
        for (std::size_t i = 0; i < d; ++i) y[i] = e.center[i] + (y[i] - e.center[i]) / r;
    }
    return y;
}

}  // namespace

Domain::Domain(std::variant<Ball, Ellipsoid> shape, std::size_t dim)
    : shape_(std::move(shape)), dim_(dim), boundary_tol_(0.0) {
    boundary_tol_ = 1e-8 * diameter();
}

Domain Domain::ball(Point center, double radius) {
    if (center.empty()) throw ValidationError("ball center must have at least one coordinate");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw ValidationError("ball radius must be positive and finite");
    }
    for (double c : center) {
        if (!std::isfinite(c)) throw ValidationError("ball center must be finite");
    }
    const std::size_t d = center.size();
    return Domain(Ball{std::move(center), radius}, d);
}

Domain Domain::ellipsoid(Point center, Point semi_axes) {
    if (center.empty()) throw ValidationError("ellipsoid center must have at least one coordinate");
    if (center.size() != semi_axes.size()) {
        throw ValidationError("ellipsoid center and semi-axes differ in dimension");
    }
    for (double a : semi_axes) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw ValidationError("ellipsoid semi-axes must be positive and finite");
        }
    }
    for (double c : center) {
        if (!std::isfinite(c)) throw ValidationError("ellipsoid center must be finite");
    }
    const std::size_t d = center.size();
    return Domain(Ellipsoid{std::move(center), std::move(semi_axes)}, d);
}

double Domain::diameter() const noexcept {
    if (const auto* b = std::get_if<Ball>(&shape_)) return 2.0 * b->radius;
    const auto& e = std::get<Ellipsoid>(shape_);
    return 2.0 * *std::max_element(e.semi_axes.begin(), e.semi_axes.end());
}

void Domain::set_boundary_tolerance(double tol) {
    if (!(tol > 0.0)) throw ValidationError("boundary tolerance must be positive");
    boundary_tol_ = tol;
}

std::pair<Point, Point> Domain::bounding_box() const {
    Point lo(dim_), hi(dim_);
    if (const auto* b = std::get_if<Ball>(&shape_)) {
        for (std::size_t i = 0; i < dim_; ++i) {
            lo[i] = b->center[i] - b->radius;
            hi[i] = b->center[i] + b->radius;
        }
    } else {
        const auto& e = std::get<Ellipsoid>(shape_);
        for (std::size_t i = 0; i < dim_; ++i) {
            lo[i] = e.center[i] - e.semi_axes[i];
            hi[i] = e.center[i] + e.semi_axes[i];
        }
    }
    return {lo, hi};
}

double defining_function(const Domain& domain, std::span<const double> x) {
    require_finite(x, domain.dimension());
    if (const auto* b = std::get_if<Ball>(&domain.shape())) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b->center[i]) * (x[i] - b->center[i]);
        return b->radius - std::sqrt(s);
    }
    const auto& e = std::get<Ellipsoid>(domain.shape());
    return min_axis(e) * (1.0 - scaled_radius(e, x));
}

Point defining_gradient(const Domain& domain, std::span<const double> x) {
    require_finite(x, domain.dimension());
    const std::size_t d = x.size();
    Point g(d, 0.0);
    if (const auto* b = std::get_if<Ball>(&domain.shape())) {
        double r = 0.0;
        for (std::size_t i = 0; i < d; ++i) r += (x[i] - b->center[i]) * (x[i] - b->center[i]);
        r = std::sqrt(r);
        if (r == 0.0) return g;
        for (std::size_t i = 0; i < d; ++i) g[i] = -(x[i] - b->center[i]) / r;
        return g;
    }
    const auto& e = std::get<Ellipsoid>(domain.shape());
    const double r = scaled_radius(e, x);
    if (r == 0.0) return g;
    const double a_min = min_axis(e);
    for (std::size_t i = 0; i < d; ++i) {
        const double a2 = e.semi_axes[i] * e.semi_axes[i];
        g[i] = -a_min * (x[i] - e.center[i]) / (a2 * r);
    }
    return g;
}

Point inward_normal(const Domain& domain, std::span<const double> x) {
    const double level = defining_function(domain, x);
    if (std::abs(level) > domain.boundary_tolerance()) {
        throw ValidationError("inward_normal: point is not on the boundary (level " +
                              std::to_string(level) + ")");
    }
    Point g = defining_gradient(domain, x);
    const double n = norm(g);
    if (n == 0.0) throw NumericalError("inward_normal: vanishing gradient");
    for (double& c : g) c /= n;
    return g;
}

Projection project_to_closure(const Domain& domain, std::span<const double> x) {
    if (defining_function(domain, x) >= 0.0) return {Point(x.begin(), x.end()), 0.0};
    const std::size_t d = x.size();
    Point y(d);
    if (const auto* b = std::get_if<Ball>(&domain.shape())) {
        double r = 0.0;
        for (std::size_t i = 0; i < d; ++i) r += (x[i] - b->center[i]) * (x[i] - b->center[i]);
        r = std::sqrt(r);
        for (std::size_t i = 0; i < d; ++i) y[i] = b->center[i] + b->radius * (x[i] - b->center[i]) / r;
    } else {
        y = ellipsoid_closest_point(std::get<Ellipsoid>(domain.shape()), x);
    }
    double disp = 0.0;
    for (std::size_t i = 0; i < d; ++i) disp += (x[i] - y[i]) * (x[i] - y[i]);
    return {std::move(y), std::sqrt(disp)};
}

bool in_closure(const Domain& domain, std::span<const double> x) {
    return defining_function(domain, x) >= -domain.boundary_tolerance();
}

}  // namespace rbdsde
