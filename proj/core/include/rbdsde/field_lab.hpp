#pragma once

#include "rbdsde/bdsde_solver.hpp"
#include "rbdsde/doss_sussman.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rbdsde {

/// Everything needed to evaluate u(t, x) = Y^{t,x}_t at arbitrary points:
/// the forward dynamics, the coefficients, the time grid and the Monte Carlo
/// resolution. The backward path is fixed by (seed, b_stream).
struct FieldProblem {
    Domain domain = Domain::ball({0.0}, 1.0);
    SdeSpec sde;
    CoefficientSet coeffs;
    TimeGrid grid{0.0, 1.0, 20};
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    std::uint64_t b_stream = 0;
    std::size_t b_dim = 1;
    SolverOptions options;
};

struct FieldScheme {
    Scheme scheme = Scheme::generalized;
    double penalty = 0.0;

    static FieldScheme generalized() { return {}; }
    static FieldScheme direct() { return {Scheme::direct, 0.0}; }
    static FieldScheme penalized(double n) { return {Scheme::penalized, n}; }
};

/// Space-time evaluation grid: time nodes (each a node of the solver grid)
/// and a tensor grid in x. Points outside the closure are skipped.
struct FieldGrid {
    std::vector<double> t_nodes;
    std::vector<std::vector<double>> x_axes;

    /// n_t equally spaced nodes over the solver grid and n_x equally spaced
    /// points per axis over the domain's bounding box.
    static FieldGrid uniform(const TimeGrid& grid, const Domain& domain, std::size_t n_t,
                             std::size_t n_x);
    /// Same time nodes; space points over the box [lo, hi] instead. Points
    /// outside the domain closure are skipped when the field is built.
    static FieldGrid uniform(const TimeGrid& grid, std::span<const double> lo,
                             std::span<const double> hi, std::size_t n_t, std::size_t n_x);
};

struct SolutionField {
    std::vector<double> t_nodes;
    std::vector<std::vector<double>> x_axes;
    std::vector<std::uint8_t> inside;  // per x point
    std::vector<double> u;             // t x points; NaN outside the closure
    std::vector<double> u_error;       // Monte Carlo standard error of u
    std::vector<double> v;             // eps(t, x, u); empty when g == 0
    std::vector<double> h;             // obstacle; empty without obstacle
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double scheme_tolerance = 0.0;
    FieldScheme scheme;
    RegressionBasis basis;
    std::uint64_t b_stream = 0;

    std::size_t x_count() const noexcept { return inside.size(); }
    Point x_point(std::size_t j) const;
    std::size_t at(std::size_t i, std::size_t j) const noexcept { return i * x_count() + j; }
};

struct FieldOptions {
    std::size_t workers = 1;
    /// Samples of the flow used for v: y range is [min u - margin, max u + margin].
    double flow_margin = 5.0;
    std::size_t flow_y_points = 201;
};

/// Solves one backward equation per grid point, all sharing one forward
/// ensemble (common random numbers) and the problem's backward path. The
/// terminal row is set to l(x) exactly.
SolutionField build_field(const FieldProblem& problem, const FieldGrid& grid,
                          const FieldScheme& scheme, const FieldOptions& options = {});

struct ObstacleGapReport {
    double min_gap = 0.0;
    double mean_gap = 0.0;
    double worst_violation = 0.0;  // max (h - u)^+
    std::size_t violations = 0;    // points with u < h - tolerance
    double tolerance = 0.0;
};

/// Requires an obstacle; tolerance defaults to the field's scheme tolerance.
ObstacleGapReport obstacle_gap_report(const SolutionField& field,
                                      std::optional<double> tolerance = std::nullopt);

struct ResidualPoint {
    double t = 0.0;
    Point x;
    bool boundary = false;
    double residual = 0.0;
};

struct ResidualReport {
    double interior_sup = 0.0;
    double interior_l2 = 0.0;
    std::size_t interior_count = 0;
    double boundary_sup = 0.0;
    double boundary_l2 = 0.0;
    std::size_t boundary_count = 0;
    std::vector<ResidualPoint> points;
};

/// Finite-difference residuals of a field built with g == 0:
/// interior nodes: min{u - h, -u_t - Lu - f(t, x, u, sigma^* grad u)} with
/// central differences (the u - h branch only with an obstacle);
/// boundary nodes: grad u . n + phi(t, x, u) with one-sided second-order
/// differences along axes that leave the closure.
ResidualReport deterministic_pde_residual(const SolutionField& field, const FieldProblem& problem);

struct ProbeRow {
    std::size_t n_paths = 0;
    double mean_u = 0.0;
    double across_variance = 0.0;  // sample variance of u over backward paths
    double within_variance = 0.0;  // mean squared Monte Carlo standard error
};

struct ProbeReport {
    double t = 0.0;
    Point x;
    std::size_t n_b_scenarios = 0;
    std::vector<ProbeRow> rows;
    /// Log-log slope of within_variance against n_paths (about -1).
    std::optional<double> within_slope;
};

/// u(t, x) for backward streams b_stream, b_stream + 1, ... at every forward
/// ensemble size in `path_counts`.
ProbeReport b_measurability_probe(const FieldProblem& problem, double t, std::span<const double> x,
                                  std::size_t n_b_scenarios,
                                  std::span<const std::size_t> path_counts,
                                  const FieldOptions& options = {});

struct DossOptions {
    std::size_t flow_x_points = 9;  // per axis over the bounding box
    double y_margin = 5.0;
    std::size_t y_points = 201;
};

struct DossConsistencyReport {
    std::vector<std::uint64_t> b_streams;
    std::vector<double> sup_errors;  // ||eps(u) - u_transformed||_inf per stream
    double tolerance = 0.0;          // 2 x scheme tolerance
    bool passed = false;
};

/// For each backward stream: builds u, maps it through the inverse flow and
/// compares with the field of the transformed equation without backward
/// noise, solved on the same forward ensemble.
DossConsistencyReport doss_consistency(const FieldProblem& problem, const FieldGrid& grid,
                                       const FieldScheme& scheme,
                                       std::span<const std::uint64_t> b_streams,
                                       const DossOptions& doss = {},
                                       const FieldOptions& options = {});

/// CSV with columns t,x_1..x_d,u,v,h,u_minus_h.
void write_field_csv(std::ostream& os, const SolutionField& field);
/// CSV with columns t,x_1..x_d,kind,residual.
void write_residual_csv(std::ostream& os, const ResidualReport& report);
void print_residual_summary(std::ostream& os, const ResidualReport& report);
void write_probe_csv(std::ostream& os, const ProbeReport& report);

}  // namespace rbdsde
