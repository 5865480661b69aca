#include "rbdsde/fixpoint.hpp"

#include "rbdsde/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace rbdsde {

NormWeights NormWeights::from_constants(const StructuralConstants& k,
                                        std::optional<double> alpha_prime, std::optional<double> mu) {
    validate_constants(k);
    NormWeights w;
    w.alpha_prime = alpha_prime.value_or(0.5 * (1.0 + k.alpha));
    if (!(w.alpha_prime > k.alpha && w.alpha_prime < 1.0)) {
        throw ValidationError("alpha' must satisfy alpha < alpha' < 1");
    }
    w.beta = k.beta;
    w.c_bar = k.c / k.alpha;
    w.beta_bar = std::abs(k.beta) / w.alpha_prime;
    w.mu = mu.value_or(w.alpha_prime * k.c / k.alpha + k.c / (1.0 - w.alpha_prime) + 1.0 -
                       w.alpha_prime);
    return w;
}

double weighted_distance(const BackwardSolution& a, const BackwardSolution& b,
                         const NormWeights& w, const ReflectedEnsemble& paths) {
    if (a.n_paths != b.n_paths || !(a.grid == b.grid) || a.dim != b.dim ||
        a.n_paths != paths.n_paths || !(a.grid == paths.grid)) {
        throw ValidationError("weighted_distance: solutions do not share paths and grid");
    }
    const std::size_t n = a.grid.n_steps();
    const double dt = a.grid.dt();
    const std::size_t k0 = std::min(a.start_step, b.start_step);
    double total = 0.0;
    for (std::size_t p = 0; p < a.n_paths; ++p) {
        for (std::size_t i = k0; i < n; ++i) {
            const double weight = std::exp(w.mu * a.grid.node(i) + w.beta * paths.a(p, i));
            const double dy = a.y(p, i) - b.y(p, i);
            double dz2 = 0.0;
            const auto za = a.z(p, i);
            const auto zb = b.z(p, i);
            for (std::size_t k = 0; k < a.dim; ++k) dz2 += (za[k] - zb[k]) * (za[k] - zb[k]);
            total += weight * (w.c_bar * dy * dy * dt + w.beta_bar * dy * dy * paths.da(p, i) +
                               dz2 * dt);
        }
    }
    return total / static_cast<double>(a.n_paths);
}

PicardResult picard_solve(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                          const PathEnsemble& noise, const NormWeights& weights, double tolerance,
                          std::size_t max_iterations, const SolverOptions& options) {
    if (!(coeffs.constants.alpha < 1.0)) throw ValidationError("Picard iteration needs alpha < 1");
    if (!(tolerance > 0.0)) throw ValidationError("Picard tolerance must be positive");
    PicardReport report;
    report.predicted_ratio = coeffs.constants.alpha / weights.alpha_prime;
    BackwardSolution current = apply_picard_map(coeffs, nullptr, paths, noise, options);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        BackwardSolution next = apply_picard_map(coeffs, &current, paths, noise, options);
        const double dist = weighted_distance(next, current, weights, paths);
        if (!report.distances.empty() && report.distances.back() > report.noise_floor) {
            report.contraction_ratios.push_back(dist / report.distances.back());
        }
        report.distances.push_back(dist);
        report.iterations = it;
        current = std::move(next);
        if (dist < tolerance) {
            report.converged = true;
            break;
        }
    }
    return PicardResult{std::move(current), std::move(report)};
}

ViolationReport comparison_check(const CoefficientSet& lower, const CoefficientSet& upper,
                                 const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                 const SolverOptions& options) {
    if (lower.has_obstacle() || upper.has_obstacle()) {
        throw ValidationError("comparison_check is defined for equations without obstacle");
    }
    if (lower.noise.is_zero() != upper.noise.is_zero() || lower.noise.dim != upper.noise.dim) {
        throw ValidationError("comparison_check requires identical backward coefficients g");
    }
    if (!lower.noise.is_zero()) {
        // Probe both coefficients on states visited by the paths.
        std::mt19937_64 engine(17);
        std::uniform_int_distribution<std::size_t> pick_path(0, paths.n_paths - 1);
        std::uniform_int_distribution<std::size_t> pick_node(0, paths.grid.n_steps());
        std::normal_distribution<double> pick_y(0.0, 3.0);
        std::vector<double> ga(lower.noise.dim), gb(lower.noise.dim), z(paths.dim);
        for (int s = 0; s < 64; ++s) {
            const std::size_t p = pick_path(engine);
            const std::size_t i = pick_node(engine);
            const double y = pick_y(engine);
            for (double& v : z) v = pick_y(engine);
            lower.noise.value(paths.grid.node(i), paths.x(p, i), y, z, ga);
            upper.noise.value(paths.grid.node(i), paths.x(p, i), y, z, gb);
            for (std::size_t k = 0; k < ga.size(); ++k) {
                if (ga[k] != gb[k]) {
                    throw ValidationError("comparison_check requires identical backward coefficients g");
                }
            }
        }
    }
    const auto solve = [&](const CoefficientSet& c) {
        return c.noise.depends_on_z ? picard_solve(c, paths, noise,
                                                   NormWeights::from_constants(c.constants), 1e-12,
                                                   50, options)
                                          .solution
                                    : solve_generalized(c, paths, noise, options);
    };
    const auto a = solve(lower);
    const auto b = solve(upper);
    const std::size_t n = paths.grid.n_steps();
    ViolationReport report;
    report.threshold = 3.0 * scheme_tolerance(paths.grid, paths.n_paths);
    report.per_node.assign(n + 1, 0);
    report.worst = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        for (std::size_t i = 0; i <= n; ++i) {
            const double diff = a.y(p, i) - b.y(p, i);
            report.worst = std::max(report.worst, diff);
            if (diff > report.threshold) {
                ++report.per_node[i];
                ++report.total;
            }
        }
    }
    return report;
}

void write_picard_csv(std::ostream& os, const PicardReport& report) {
    os << "iteration,distance,ratio\n";
    for (std::size_t k = 0; k < report.distances.size(); ++k) {
        // The first ratio belongs to the second iteration.
        const std::size_t shift = report.distances.size() - report.contraction_ratios.size();
        if (k >= shift) {
            fmt::print(os, "{},{:.17g},{:.17g}\n", k + 1, report.distances[k],
                       report.contraction_ratios[k - shift]);
        } else {
            fmt::print(os, "{},{:.17g},\n", k + 1, report.distances[k]);
        }
    }
}

void write_violation_csv(std::ostream& os, const ViolationReport& report, const TimeGrid& grid) {
    os << "step,time,violations\n";
    for (std::size_t i = 0; i < report.per_node.size(); ++i) {
        fmt::print(os, "{},{:.17g},{}\n", i, grid.node(i), report.per_node[i]);
    }
}

void print_picard_summary(std::ostream& os, const PicardReport& report) {
    fmt::print(os, "== Picard iteration ==\n");
    fmt::print(os, "iterations        {}\n", report.iterations);
    fmt::print(os, "converged         {}\n", report.converged ? "yes" : "no");
    fmt::print(os, "predicted ratio   {:.6g}\n", report.predicted_ratio);
    if (!report.distances.empty()) {
        fmt::print(os, "final distance    {:.6e}\n", report.distances.back());
    }
    if (!report.contraction_ratios.empty()) {
        const auto [lo, hi] = std::minmax_element(report.contraction_ratios.begin(),
                                                  report.contraction_ratios.end());
        fmt::print(os, "measured ratios   [{:.6g}, {:.6g}]\n", *lo, *hi);
    }
}

void print_violation_summary(std::ostream& os, const ViolationReport& report) {
    fmt::print(os, "== Comparison check ==\n");
    fmt::print(os, "threshold         {:.6g}\n", report.threshold);
    fmt::print(os, "violations        {}\n", report.total);
    fmt::print(os, "worst Y_A - Y_B   {:.6g}\n", report.worst);
}

}  // namespace rbdsde
