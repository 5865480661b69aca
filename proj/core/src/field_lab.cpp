#include "rbdsde/field_lab.hpp"

#include "rbdsde/errors.hpp"
#include "rbdsde/fixpoint.hpp"
#include "rbdsde/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace rbdsde {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t point_count(const std::vector<std::vector<double>>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

Point point_of(const std::vector<std::vector<double>>& axes, std::size_t j) {
    Point x(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        x[a] = axes[a][j % axes[a].size()];
        j /= axes[a].size();
    }
    return x;
}

std::vector<std::size_t> multi_index(const std::vector<std::vector<double>>& axes, std::size_t j) {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        idx[a] = j % axes[a].size();
        j /= axes[a].size();
    }
    return idx;
}

std::size_t flat_index(const std::vector<std::vector<double>>& axes,
                       const std::vector<std::size_t>& idx) {
    std::size_t j = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) j = j * axes[a].size() + idx[a];
    return j;
}

std::string describe_point(double t, std::span<const double> x) {
    return fmt::format("(t={}, x=[{}])", t, fmt::join(x, ", "));
}

void validate_grid(const FieldProblem& problem, const FieldGrid& grid) {
    if (grid.t_nodes.empty()) throw ValidationError("field grid has no time nodes");
    for (std::size_t i = 0; i < grid.t_nodes.size(); ++i) {
        problem.grid.node_index(grid.t_nodes[i]);
        if (i > 0 && !(grid.t_nodes[i] > grid.t_nodes[i - 1])) {
            throw ValidationError("field time nodes must be increasing");
        }
    }
    if (grid.x_axes.size() != problem.coeffs.dim || problem.domain.dimension() != problem.coeffs.dim ||
        problem.sde.dim != problem.coeffs.dim) {
        throw ValidationError("field grid, domain, SDE and coefficients disagree on the dimension");
    }
    for (const auto& axis : grid.x_axes) {
        if (axis.empty()) throw ValidationError("field grid axis is empty");
        for (std::size_t q = 1; q < axis.size(); ++q) {
            if (!(axis[q] > axis[q - 1])) throw ValidationError("field grid axis must be increasing");
        }
    }
}

BackwardSolution solve_point(const FieldProblem& problem, const FieldScheme& scheme,
                             const ReflectedEnsemble& paths, const PathEnsemble& noise) {
    const CoefficientSet& c = problem.coeffs;
    if (c.noise.depends_on_z) {
        return picard_solve(c, paths, noise, NormWeights::from_constants(c.constants), 1e-10, 50,
                            problem.options)
            .solution;
    }
    switch (scheme.scheme) {
        case Scheme::direct: return solve_reflected_direct(c, paths, noise, problem.options);
        case Scheme::penalized:
            return solve_penalized(c, scheme.penalty, paths, noise, problem.options);
        case Scheme::generalized: break;
    }
    return solve_generalized(c, paths, noise, problem.options);
}

Point unit_gradient(const Domain& domain, std::span<const double> x) {
    Point n = defining_gradient(domain, x);
    double norm = 0.0;
    for (double v : n) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& v : n) v /= norm;
    }
    return n;
}

double finite_max(std::span<const double> v, bool lower) {
    double best = lower ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (std::isfinite(x)) best = lower ? std::min(best, x) : std::max(best, x);
    }
    return best;
}

}  // namespace

FieldGrid FieldGrid::uniform(const TimeGrid& grid, const Domain& domain, std::size_t n_t,
                             std::size_t n_x) {
    const auto [lo, hi] = domain.bounding_box();
    return uniform(grid, lo, hi, n_t, n_x);
}

FieldGrid FieldGrid::uniform(const TimeGrid& grid, std::span<const double> lo,
                             std::span<const double> hi, std::size_t n_t, std::size_t n_x) {
    if (lo.size() != hi.size() || lo.empty()) throw ValidationError("field box corners differ in dimension");
    for (std::size_t a = 0; a < lo.size(); ++a) {
        if (!(lo[a] <= hi[a])) throw ValidationError("field box needs lo <= hi on every axis");
    }
    if (n_t < 1 || n_x < 1) throw ValidationError("field grid needs at least one node per axis");
    if (n_t > 1 && grid.n_steps() % (n_t - 1) != 0) {
        throw ValidationError(fmt::format(
            "{} time nodes do not fall on a grid with {} steps", n_t, grid.n_steps()));
    }
    FieldGrid g;
    if (n_t == 1) {
        g.t_nodes.push_back(grid.t_start());
    } else {
        const std::size_t stride = grid.n_steps() / (n_t - 1);
        for (std::size_t i = 0; i < n_t; ++i) g.t_nodes.push_back(grid.node(i * stride));
    }
    for (std::size_t a = 0; a < lo.size(); ++a) {
        std::vector<double> axis;
        if (n_x == 1) {
            axis.push_back(0.5 * (lo[a] + hi[a]));
        } else {
            for (std::size_t k = 0; k < n_x; ++k) {
                axis.push_back(k + 1 == n_x ? hi[a]
                                            : lo[a] + (hi[a] - lo[a]) * static_cast<double>(k) /
                                                          static_cast<double>(n_x - 1));
            }
        }
        g.x_axes.push_back(std::move(axis));
    }
    return g;
}

Point SolutionField::x_point(std::size_t j) const { return point_of(x_axes, j); }

SolutionField build_field(const FieldProblem& problem, const FieldGrid& grid,
                          const FieldScheme& scheme, const FieldOptions& options) {
    validate_grid(problem, grid);
    const CoefficientSet& c = problem.coeffs;
    if (!c.terminal) throw ValidationError("coefficient set has no terminal function");
    const std::size_t d = c.dim;
    const PathEnsemble ensemble = sample_ensemble(problem.grid, d, problem.b_dim, problem.n_paths,
                                                  problem.seed, problem.b_stream);
    SolutionField field;
    field.t_nodes = grid.t_nodes;
    field.x_axes = grid.x_axes;
    field.n_paths = problem.n_paths;
    field.n_steps = problem.grid.n_steps();
    field.scheme_tolerance = scheme_tolerance(problem.grid, problem.n_paths);
    field.scheme = scheme;
    field.basis = problem.options.basis;
    field.b_stream = problem.b_stream;

    const std::size_t nx = point_count(grid.x_axes);
    const std::size_t nt = grid.t_nodes.size();
    field.inside.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) {
        field.inside[j] = in_closure(problem.domain, point_of(grid.x_axes, j)) ? 1 : 0;
    }
    field.u.assign(nt * nx, kNaN);
    field.u_error.assign(nt * nx, kNaN);

    parallel_for(nt * nx, options.workers, [&](std::size_t k) {
        const std::size_t i = k / nx;
        const std::size_t j = k % nx;
        if (!field.inside[j]) return;
        const double t = grid.t_nodes[i];
        const Point x = point_of(grid.x_axes, j);
        if (problem.grid.node_index(t) == problem.grid.n_steps()) {
            field.u[k] = c.terminal(x);
            field.u_error[k] = 0.0;
            return;
        }
        try {
            const ReflectedEnsemble paths =
                simulate_ensemble(problem.domain, problem.sde, StartPoint{t, x}, ensemble);
            const BackwardSolution sol = solve_point(problem, scheme, paths, ensemble);
            field.u[k] = sol.start_value();
            field.u_error[k] = sol.start_standard_error;
        } catch (const ValidationError& e) {
            throw ValidationError(describe_point(t, x) + ": " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError(describe_point(t, x) + ": " + e.what());
        }
    });

    if (c.has_obstacle()) {
        field.h.assign(nt * nx, kNaN);
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                if (field.inside[j]) field.h[field.at(i, j)] = c.obstacle(grid.t_nodes[i], point_of(grid.x_axes, j));
            }
        }
    }

    if (!c.noise.is_zero() && !c.noise.depends_on_z) {
        FlowSamples samples;
        samples.x_axes = grid.x_axes;
        samples.y_min = finite_max(field.u, true) - options.flow_margin;
        samples.y_max = finite_max(field.u, false) + options.flow_margin;
        samples.y_points = options.flow_y_points;
        const FlowField flow = solve_flow(c.noise, ensemble.bundle(0), samples);
        field.v.assign(nt * nx, kNaN);
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                if (!field.inside[j]) continue;
                const Point x = point_of(grid.x_axes, j);
                try {
                    field.v[field.at(i, j)] = flow.inverse(grid.t_nodes[i], x, field.u[field.at(i, j)]);
                } catch (const NumericalError& e) {
                    throw NumericalError(describe_point(grid.t_nodes[i], x) + ": " + e.what());
                }
            }
        }
    }
    return field;
}

ObstacleGapReport obstacle_gap_report(const SolutionField& field, std::optional<double> tolerance) {
    if (field.h.empty()) throw ValidationError("obstacle_gap_report needs a field with obstacle");
    ObstacleGapReport r;
    r.tolerance = tolerance.value_or(field.scheme_tolerance);
    r.min_gap = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < field.u.size(); ++k) {
        if (!std::isfinite(field.u[k])) continue;
        const double gap = field.u[k] - field.h[k];
        r.min_gap = std::min(r.min_gap, gap);
        r.worst_violation = std::max(r.worst_violation, -gap);
        sum += gap;
        ++count;
        if (gap < -r.tolerance) ++r.violations;
    }
    r.mean_gap = count > 0 ? sum / static_cast<double>(count) : 0.0;
    return r;
}

ResidualReport deterministic_pde_residual(const SolutionField& field, const FieldProblem& problem) {
    const CoefficientSet& c = problem.coeffs;
    if (!c.noise.is_zero()) {
        throw ValidationError("deterministic residuals need a field built with g == 0");
    }
    const auto& axes = field.x_axes;
    const std::size_t d = axes.size();
    const std::size_t nt = field.t_nodes.size();
    const std::size_t nx = field.x_count();
    if (nt < 3) throw ValidationError("grid too coarse for the stencil: need 3 time nodes");
    std::vector<double> spacing(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (axes[a].size() < 3) {
            throw ValidationError("grid too coarse for the stencil: need 3 points per axis");
        }
        spacing[a] = axes[a][1] - axes[a][0];
        for (std::size_t q = 2; q < axes[a].size(); ++q) {
            if (std::abs(axes[a][q] - axes[a][q - 1] - spacing[a]) > 1e-9 * std::abs(spacing[a])) {
                throw ValidationError("residual stencils need uniformly spaced x axes");
            }
        }
    }
    const double btol = problem.domain.boundary_tolerance() + 1e-9 * problem.domain.diameter();

    const auto u_at = [&](std::size_t i, std::size_t j) { return field.u[field.at(i, j)]; };
    // Neighbour along axis a at offset s, if it exists and lies in the closure.
    const auto neighbour = [&](const std::vector<std::size_t>& idx, std::size_t a,
                               long s) -> std::optional<std::size_t> {
        const long q = static_cast<long>(idx[a]) + s;
        if (q < 0 || q >= static_cast<long>(axes[a].size())) return std::nullopt;
        auto other = idx;
        other[a] = static_cast<std::size_t>(q);
        const std::size_t j = flat_index(axes, other);
        if (!field.inside[j]) return std::nullopt;
        return j;
    };

    ResidualReport report;
    double sum_i = 0.0, sum_b = 0.0;
    std::vector<double> sigma(d * d), drift(d), grad(d), hess(d * d), z(d);
    for (std::size_t j = 0; j < nx; ++j) {
        if (!field.inside[j]) continue;
        const Point x = point_of(axes, j);
        const auto idx = multi_index(axes, j);
        const double psi = defining_function(problem.domain, x);
        if (std::abs(psi) <= btol) {
            const Point n = unit_gradient(problem.domain, x);
            for (std::size_t i = 0; i < nt; ++i) {
                const double t = field.t_nodes[i];
                double dn = 0.0;
                for (std::size_t a = 0; a < d; ++a) {
                    if (n[a] == 0.0) continue;
                    const auto up = neighbour(idx, a, 1), dn1 = neighbour(idx, a, -1);
                    double g = 0.0;
                    if (up && dn1) {
                        g = (u_at(i, *up) - u_at(i, *dn1)) / (2.0 * spacing[a]);
                    } else if (up && neighbour(idx, a, 2)) {
                        g = (-3.0 * u_at(i, j) + 4.0 * u_at(i, *up) - u_at(i, *neighbour(idx, a, 2))) /
                            (2.0 * spacing[a]);
                    } else if (dn1 && neighbour(idx, a, -2)) {
                        g = (3.0 * u_at(i, j) - 4.0 * u_at(i, *dn1) + u_at(i, *neighbour(idx, a, -2))) /
                            (2.0 * spacing[a]);
                    } else {
                        throw ValidationError("grid too coarse for the boundary stencil at " +
                                              describe_point(t, x));
                    }
                    dn += g * n[a];
                }
                const double u0 = u_at(i, j);
                double r = dn + (c.boundary ? c.boundary(t, x, u0) : 0.0);
                if (c.has_obstacle()) r = std::min(u0 - c.obstacle(t, x), -r);
                report.points.push_back({t, x, true, r});
                report.boundary_sup = std::max(report.boundary_sup, std::abs(r));
                sum_b += r * r;
                ++report.boundary_count;
            }
            continue;
        }
        // Interior stencil: axis neighbours and, for mixed derivatives, corners.
        bool complete = true;
        std::vector<std::size_t> up(d), down(d);
        for (std::size_t a = 0; a < d && complete; ++a) {
            const auto p = neighbour(idx, a, 1), m = neighbour(idx, a, -1);
            if (!p || !m) {
                complete = false;
            } else {
                up[a] = *p;
                down[a] = *m;
            }
        }
        for (std::size_t a = 0; a < d && complete; ++a) {
            for (std::size_t b = a + 1; b < d && complete; ++b) {
                for (long sa : {-1L, 1L}) {
                    for (long sb : {-1L, 1L}) {
                        auto q = idx;
                        q[a] = static_cast<std::size_t>(static_cast<long>(q[a]) + sa);
                        q[b] = static_cast<std::size_t>(static_cast<long>(q[b]) + sb);
                        if (!field.inside[flat_index(axes, q)]) complete = false;
                    }
                }
            }
        }
        if (!complete) continue;
        problem.sde.diffusion(x, sigma);
        problem.sde.drift(x, drift);
        for (std::size_t i = 1; i + 1 < nt; ++i) {
            const double t = field.t_nodes[i];
            const double h1 = t - field.t_nodes[i - 1];
            const double h2 = field.t_nodes[i + 1] - t;
            const double u0 = u_at(i, j);
            const double ut = -h2 / (h1 * (h1 + h2)) * u_at(i - 1, j) + (h2 - h1) / (h1 * h2) * u0 +
                              h1 / (h2 * (h1 + h2)) * u_at(i + 1, j);
            for (std::size_t a = 0; a < d; ++a) {
                grad[a] = (u_at(i, up[a]) - u_at(i, down[a])) / (2.0 * spacing[a]);
                hess[a * d + a] =
                    (u_at(i, up[a]) - 2.0 * u0 + u_at(i, down[a])) / (spacing[a] * spacing[a]);
                for (std::size_t b = a + 1; b < d; ++b) {
                    auto q = idx;
                    double acc = 0.0;
                    for (long sa : {-1L, 1L}) {
                        for (long sb : {-1L, 1L}) {
                            q[a] = static_cast<std::size_t>(static_cast<long>(idx[a]) + sa);
                            q[b] = static_cast<std::size_t>(static_cast<long>(idx[b]) + sb);
                            acc += static_cast<double>(sa * sb) * u_at(i, flat_index(axes, q));
                        }
                    }
                    hess[a * d + b] = hess[b * d + a] = acc / (4.0 * spacing[a] * spacing[b]);
                }
            }
            double lu = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                lu += drift[a] * grad[a];
                for (std::size_t b = 0; b < d; ++b) {
                    double cov = 0.0;
                    for (std::size_t k = 0; k < d; ++k) cov += sigma[a * d + k] * sigma[b * d + k];
                    lu += 0.5 * cov * hess[a * d + b];
                }
            }
            for (std::size_t k = 0; k < d; ++k) {
                z[k] = 0.0;
                for (std::size_t a = 0; a < d; ++a) z[k] += sigma[a * d + k] * grad[a];
            }
            double r = -ut - lu - (c.driver ? c.driver(t, x, u0, z) : 0.0);
            if (c.has_obstacle()) r = std::min(u0 - c.obstacle(t, x), r);
            report.points.push_back({t, x, false, r});
            report.interior_sup = std::max(report.interior_sup, std::abs(r));
            sum_i += r * r;
            ++report.interior_count;
        }
    }
    if (report.interior_count > 0) {
        report.interior_l2 = std::sqrt(sum_i / static_cast<double>(report.interior_count));
    }
    if (report.boundary_count > 0) {
        report.boundary_l2 = std::sqrt(sum_b / static_cast<double>(report.boundary_count));
    }
    return report;
}

ProbeReport b_measurability_probe(const FieldProblem& problem, double t, std::span<const double> x,
                                  std::size_t n_b_scenarios,
                                  std::span<const std::size_t> path_counts,
                                  const FieldOptions& options) {
    if (n_b_scenarios < 2) throw ValidationError("the probe needs at least two backward scenarios");
    if (path_counts.empty()) throw ValidationError("the probe needs at least one ensemble size");
    ProbeReport report;
    report.t = t;
    report.x.assign(x.begin(), x.end());
    report.n_b_scenarios = n_b_scenarios;
    FieldGrid grid;
    grid.t_nodes = {t};
    for (double v : x) grid.x_axes.push_back({v});
    const FieldScheme scheme =
        problem.coeffs.has_obstacle() ? FieldScheme::direct() : FieldScheme::generalized();
    FieldOptions inner = options;
    inner.workers = 1;
    std::vector<double> counts, within;
    for (std::size_t n : path_counts) {
        std::vector<double> u(n_b_scenarios), se2(n_b_scenarios);
        parallel_for(n_b_scenarios, options.workers, [&](std::size_t s) {
            FieldProblem p = problem;
            p.n_paths = n;
            p.b_stream = problem.b_stream + s;
            const SolutionField f = build_field(p, grid, scheme, inner);
            u[s] = f.u[0];
            se2[s] = f.u_error[0] * f.u_error[0];
        });
        ProbeRow row;
        row.n_paths = n;
        for (double v : u) row.mean_u += v;
        row.mean_u /= static_cast<double>(n_b_scenarios);
        for (double v : u) row.across_variance += (v - row.mean_u) * (v - row.mean_u);
        row.across_variance /= static_cast<double>(n_b_scenarios - 1);
        for (double v : se2) row.within_variance += v;
        row.within_variance /= static_cast<double>(n_b_scenarios);
        report.rows.push_back(row);
        if (row.within_variance > 0.0) {
            counts.push_back(static_cast<double>(n));
            within.push_back(row.within_variance);
        }
    }
    if (counts.size() >= 2) report.within_slope = loglog_slope(counts, within);
    return report;
}

DossConsistencyReport doss_consistency(const FieldProblem& problem, const FieldGrid& grid,
                                       const FieldScheme& scheme,
                                       std::span<const std::uint64_t> b_streams,
                                       const DossOptions& doss, const FieldOptions& options) {
    if (b_streams.empty()) throw ValidationError("doss_consistency needs at least one stream");
    if (problem.coeffs.noise.depends_on_z) {
        throw ValidationError("the flow transform needs g independent of z");
    }
    DossConsistencyReport report;
    report.tolerance = 2.0 * scheme_tolerance(problem.grid, problem.n_paths);
    report.passed = true;
    const std::size_t d = problem.coeffs.dim;
    const auto [lo, hi] = problem.domain.bounding_box();
    for (std::uint64_t stream : b_streams) {
        FieldProblem p = problem;
        p.b_stream = stream;
        const SolutionField original = build_field(p, grid, scheme, options);
        const std::vector<double>& v = original.v.empty() ? original.u : original.v;

        FlowSamples samples;
        for (std::size_t a = 0; a < d; ++a) {
            std::vector<double> axis;
            const std::size_t m = std::max<std::size_t>(doss.flow_x_points, 2);
            for (std::size_t k = 0; k < m; ++k) {
                axis.push_back(k + 1 == m ? hi[a]
                                          : lo[a] + (hi[a] - lo[a]) * static_cast<double>(k) /
                                                        static_cast<double>(m - 1));
            }
            samples.x_axes.push_back(std::move(axis));
        }
        samples.y_min = std::min(finite_max(original.u, true), finite_max(v, true)) - doss.y_margin;
        samples.y_max = std::max(finite_max(original.u, false), finite_max(v, false)) + doss.y_margin;
        samples.y_points = doss.y_points;
        const PathBundle bundle = sample_bundle(p.grid, d, p.b_dim, p.seed, stream);
        const FlowField flow = solve_flow(p.coeffs.noise, bundle, samples);

        FieldProblem q = p;
        q.coeffs = transform_coefficients(p.coeffs, flow, p.domain, p.sde);
        const SolutionField transformed = build_field(q, grid, scheme, options);
        double sup = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!std::isfinite(v[k])) continue;
            sup = std::max(sup, std::abs(v[k] - transformed.u[k]));
        }
        report.b_streams.push_back(stream);
        report.sup_errors.push_back(sup);
        if (!(sup <= report.tolerance)) report.passed = false;
    }
    return report;
}

void write_field_csv(std::ostream& os, const SolutionField& field) {
    os << "t";
    for (std::size_t a = 0; a < field.x_axes.size(); ++a) fmt::print(os, ",x_{}", a + 1);
    os << ",u,v,h,u_minus_h\n";
    for (std::size_t i = 0; i < field.t_nodes.size(); ++i) {
        for (std::size_t j = 0; j < field.x_count(); ++j) {
            if (!field.inside[j]) continue;
            const std::size_t k = field.at(i, j);
            fmt::print(os, "{:.17g}", field.t_nodes[i]);
            for (double v : field.x_point(j)) fmt::print(os, ",{:.17g}", v);
            const double v = field.v.empty() ? field.u[k] : field.v[k];
            if (field.h.empty()) {
                fmt::print(os, ",{:.17g},{:.17g},,\n", field.u[k], v);
            } else {
                fmt::print(os, ",{:.17g},{:.17g},{:.17g},{:.17g}\n", field.u[k], v, field.h[k],
                           field.u[k] - field.h[k]);
            }
        }
    }
}

void write_residual_csv(std::ostream& os, const ResidualReport& report) {
    const std::size_t d = report.points.empty() ? 0 : report.points.front().x.size();
    os << "t";
    for (std::size_t a = 0; a < d; ++a) fmt::print(os, ",x_{}", a + 1);
    os << ",kind,residual\n";
    for (const auto& p : report.points) {
        fmt::print(os, "{:.17g}", p.t);
        for (double v : p.x) fmt::print(os, ",{:.17g}", v);
        fmt::print(os, ",{},{:.17g}\n", p.boundary ? "boundary" : "interior", p.residual);
    }
}

void print_residual_summary(std::ostream& os, const ResidualReport& report) {
    fmt::print(os, "== Deterministic residuals ==\n");
    fmt::print(os, "interior nodes    {}\n", report.interior_count);
    fmt::print(os, "interior sup      {:.6g}\n", report.interior_sup);
    fmt::print(os, "interior L2       {:.6g}\n", report.interior_l2);
    fmt::print(os, "boundary nodes    {}\n", report.boundary_count);
    fmt::print(os, "boundary sup      {:.6g}\n", report.boundary_sup);
    fmt::print(os, "boundary L2       {:.6g}\n", report.boundary_l2);
}

void write_probe_csv(std::ostream& os, const ProbeReport& report) {
    os << "n_paths,mean_u,across_variance,within_variance\n";
    for (const auto& r : report.rows) {
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g}\n", r.n_paths, r.mean_u, r.across_variance,
                   r.within_variance);
    }
}

}  // namespace rbdsde
