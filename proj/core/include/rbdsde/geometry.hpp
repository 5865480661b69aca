#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace rbdsde {

using Point = std::vector<double>;

struct Ball {
    Point center;
    double radius = 1.0;
};

struct Ellipsoid {
    Point center;
    Point semi_axes;
};

/// Smooth bounded region described by a defining function that is positive
/// inside, zero on the boundary and negative outside.
///
/// Only balls and axis-aligned ellipsoids are supported; for both the
/// closest-point projection and the normal field are available in closed
/// form (or through a one-dimensional root find).
class Domain {
public:
    static Domain ball(Point center, double radius);
    static Domain ellipsoid(Point center, Point semi_axes);

    std::size_t dimension() const noexcept { return dim_; }
    double diameter() const noexcept;

    /// Distance from the boundary still treated as "on the boundary".
    /// Defaults to 1e-8 times the diameter.
    double boundary_tolerance() const noexcept { return boundary_tol_; }
    void set_boundary_tolerance(double tol);

    const std::variant<Ball, Ellipsoid>& shape() const noexcept { return shape_; }

    /// Axis-aligned bounding box (lower corner, upper corner).
    std::pair<Point, Point> bounding_box() const;

private:
    Domain(std::variant<Ball, Ellipsoid> shape, std::size_t dim);

    std::variant<Ball, Ellipsoid> shape_;
    std::size_t dim_;
    double boundary_tol_;
};

/// Signed defining function. For a ball it is R - |x - c|; for an ellipsoid
/// a_min * (1 - |D^{-1}(x - c)|) with D the diagonal of semi-axes.
double defining_function(const Domain& domain, std::span<const double> x);

/// Gradient of the defining function. Returns the zero vector at the center,
/// where the function is not differentiable.
Point defining_gradient(const Domain& domain, std::span<const double> x);

/// Inward unit normal at a boundary point. Throws ValidationError if x is
/// farther from the boundary than the domain's boundary tolerance.
Point inward_normal(const Domain& domain, std::span<const double> x);

struct Projection {
    Point point;
    double displacement = 0.0;
};

/// Closest point of the closure. Interior points are returned unchanged with
/// zero displacement.
Projection project_to_closure(const Domain& domain, std::span<const double> x);

bool in_closure(const Domain& domain, std::span<const double> x);

}  // namespace rbdsde
