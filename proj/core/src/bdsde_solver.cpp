#include "rbdsde/bdsde_solver.hpp"

#include "rbdsde/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace rbdsde {
namespace {

struct RunConfig {
    Scheme scheme = Scheme::generalized;
    double penalty = 0.0;
    bool picard = false;
    const BackwardSolution* previous = nullptr;
};

void check_inputs(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                  const PathEnsemble& noise) {
    if (!(paths.grid == noise.grid)) throw ValidationError("paths and noise use different grids");
    if (paths.n_paths != noise.n_paths) {
        throw ValidationError("paths and noise have different numbers of paths");
    }
    if (paths.dim != coeffs.dim || noise.w_dim != coeffs.dim) {
        throw ValidationError("coefficient dimension does not match the simulated state");
    }
    if (!coeffs.noise.is_zero() && coeffs.noise.dim != noise.b_dim) {
        throw ValidationError("noise coefficient dimension does not match backward noise");
    }
    if (!coeffs.terminal) throw ValidationError("coefficient set has no terminal function");
}

BackwardSolution run_backward(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                              const PathEnsemble& noise, const SolverOptions& options,
                              const RunConfig& cfg) {
    check_inputs(coeffs, paths, noise);
    const TimeGrid& grid = paths.grid;
    const std::size_t n = grid.n_steps();
    const std::size_t np = paths.n_paths;
    const std::size_t d = paths.dim;
    const std::size_t l = noise.b_dim;
    const std::size_t k0 = paths.start_step;
    const double dt = grid.dt();
    const bool has_obstacle = coeffs.has_obstacle();

    if (cfg.scheme != Scheme::generalized && !has_obstacle) {
        throw ValidationError("penalized and direct schemes need an obstacle");
    }
    const double stiffness = cfg.penalty * dt;
    bool implicit = false;
    if (cfg.scheme == Scheme::penalized && stiffness > options.stiffness_cap) {
        if (!options.implicit_penalty) {
            throw ValidationError("penalty n * dt = " + std::to_string(stiffness) +
                                  " exceeds the stiffness cap " +
                                  std::to_string(options.stiffness_cap) +
                                  " and implicit mode is disabled");
        }
        implicit = true;
    }

    BackwardSolution sol;
    sol.grid = grid;
    sol.n_paths = np;
    sol.dim = d;
    sol.start_step = k0;
    sol.y_values.assign(np * (n + 1), 0.0);
    sol.z_values.assign(np * n * d, 0.0);
    sol.k_values.assign(np * (n + 1), 0.0);
    sol.b_stream = noise.b_stream;
    sol.scheme = cfg.scheme;
    sol.penalty = cfg.penalty;
    sol.implicit_penalty_used = implicit;
    sol.basis = options.basis;

    auto Y = [&](std::size_t p, std::size_t i) -> double& { return sol.y_values[p * (n + 1) + i]; };


    std::vector<double> xi(np * d), hvals(has_obstacle ? np : 0), y_next(np), target(np),
        fitted(np), zt(np), zfit(np), noise_term(np, 0.0), dk(np * n, 0.0), realized(np);
    std::vector<double> gbuf(l), zero_z(d, 0.0);

    for (std::size_t p = 0; p < np; ++p) {
        Y(p, n) = coeffs.terminal(paths.x(p, n));
        realized[p] = Y(p, n);
    }

    for (std::size_t step = n; step-- > k0;) {
        const double t_i = grid.node(step);
        const double t_next = grid.node(step + 1);
        const auto db = noise.b.row(step);
        for (std::size_t p = 0; p < np; ++p) {
            const auto x = paths.x(p, step);
            std::copy(x.begin(), x.end(), xi.begin() + p * d);
            if (has_obstacle) hvals[p] = coeffs.obstacle(t_i, x);
            y_next[p] = Y(p, step + 1);
        }
        const bool obstacle_column = has_obstacle && options.basis.obstacle_column;
        const ConditionalExpectation reg(options.basis, xi, d,
                                         obstacle_column ? std::span<const double>(hvals)
                                                         : std::span<const double>());

        // Z_i = E[(Y_{i+1} - mean) dW_i | X_i] / dt
        double y_mean = 0.0;
        for (double v : y_next) y_mean += v;
        y_mean /= static_cast<double>(np);
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t p = 0; p < np; ++p) {
                zt[p] = (y_next[p] - y_mean) * noise.w_increment(p, step)[j];
            }
            reg.fit(zt, zfit);
            for (std::size_t p = 0; p < np; ++p) sol.z_values[(p * n + step) * d + j] = zfit[p] / dt;
        }

        // Backward Ito term evaluated at the right node.
        if (!coeffs.noise.is_zero()) {
            const std::size_t z_node = std::min(step + 1, n - 1);
            for (std::size_t p = 0; p < np; ++p) {
                double y_arg = y_next[p];
                std::span<const double> z_arg;
                if (cfg.previous != nullptr) {
                    y_arg = cfg.previous->y(p, step + 1);
                    z_arg = cfg.previous->z(p, z_node);
                } else if (cfg.picard) {
                    y_arg = 0.0;
                    z_arg = zero_z;
                }
                coeffs.noise.value(t_next, paths.x(p, step + 1), y_arg, z_arg, gbuf);
                double s = 0.0;
                for (std::size_t k = 0; k < l; ++k) s += gbuf[k] * db[k];
                noise_term[p] = s;
            }
        }

        auto assemble = [&](std::span<const double> y_arg) {
            for (std::size_t p = 0; p < np; ++p) {
                const auto x = paths.x(p, step);
                double v = y_next[p] + noise_term[p];
                if (coeffs.driver) v += coeffs.driver(t_i, x, y_arg[p], sol.z(p, step)) * dt;
                if (coeffs.boundary) {
                    const double da = paths.da(p, step);
                    if (da != 0.0) v += coeffs.boundary(t_i, x, y_arg[p]) * da;
                }
                target[p] = v;
            }
        };
        assemble(y_next);
        reg.fit(target, fitted);
        if (options.picard_pass) {
            const std::vector<double> first = fitted;
            assemble(first);
            reg.fit(target, fitted);
        }

        for (std::size_t p = 0; p < np; ++p) {
            double yv = fitted[p];
            double inc = 0.0;
            if (cfg.scheme == Scheme::direct) {
                if (yv < hvals[p]) {
                    inc = hvals[p] - yv;
                    yv = hvals[p];
                }
            } else if (cfg.scheme == Scheme::penalized && cfg.penalty > 0.0) {
                const double gap = hvals[p] - yv;  // (y - h)^- before the update
                if (gap > 0.0) {
                    yv = implicit ? (yv + stiffness * hvals[p]) / (1.0 + stiffness)
                                  : yv + stiffness * gap;
                }
                inc = stiffness * std::max(hvals[p] - yv, 0.0);
            }
            Y(p, step) = yv;
            dk[p * n + step] = inc;
            realized[p] += target[p] - y_next[p] + inc;
        }
    }

    // The standard error comes from the pathwise realized value (terminal
    // value plus accumulated increments), whose mean is the start value.
    if (np > 1) {
        double m = 0.0, s2 = 0.0;
        for (double v : realized) m += v;
        m /= static_cast<double>(np);
        for (double v : realized) s2 += (v - m) * (v - m);
        sol.start_standard_error =
            std::sqrt(s2 / static_cast<double>(np - 1) / static_cast<double>(np));
    }

    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t i = 0; i < k0; ++i) Y(p, i) = Y(p, k0);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += dk[p * n + i];
            sol.k_values[p * (n + 1) + i + 1] = acc;
        }
    }
    return sol;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::generalized: return "generalized";
        case Scheme::penalized: return "penalized";
        case Scheme::direct: return "direct";
    }
    return "unknown";
}

double BackwardSolution::start_value() const {
    return mean_y(start_step);
}

double BackwardSolution::mean_y(std::size_t i) const {
    double s = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) s += y(p, i);
    return s / static_cast<double>(n_paths);
}

double scheme_tolerance(const TimeGrid& grid, std::size_t n_paths) {
    return grid.dt() + 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_paths, 1)));
}

BackwardSolution solve_generalized(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                                   const PathEnsemble& noise, const SolverOptions& options) {
    if (coeffs.noise.depends_on_z) {
        throw ValidationError("z-dependent noise coefficients are solved by Picard iteration");
    }
    return run_backward(coeffs, paths, noise, options, RunConfig{});
}

BackwardSolution solve_penalized(const CoefficientSet& coeffs, double penalty,
                                 const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                 const SolverOptions& options) {
    if (!coeffs.has_obstacle()) throw ValidationError("solve_penalized needs an obstacle");
    if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
        throw ValidationError("penalization level must be a nonnegative number");
    }
    if (coeffs.noise.depends_on_z) {
        throw ValidationError("z-dependent noise coefficients are solved by Picard iteration");
    }
    return run_backward(coeffs, paths, noise, options, RunConfig{Scheme::penalized, penalty});
}

BackwardSolution solve_reflected_direct(const CoefficientSet& coeffs,
                                        const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                        const SolverOptions& options) {
    if (!coeffs.has_obstacle()) throw ValidationError("solve_reflected_direct needs an obstacle");
    if (coeffs.noise.depends_on_z) {
        throw ValidationError("z-dependent noise coefficients are solved by Picard iteration");
    }
    return run_backward(coeffs, paths, noise, options, RunConfig{Scheme::direct});
}

BackwardSolution apply_picard_map(const CoefficientSet& coeffs, const BackwardSolution* previous,
                                  const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                  const SolverOptions& options) {
    if (previous != nullptr &&
        (previous->n_paths != paths.n_paths || !(previous->grid == paths.grid) ||
         previous->dim != paths.dim)) {
        throw ValidationError("previous iterate does not share paths with this solve");
    }
    RunConfig cfg;
    cfg.scheme = coeffs.has_obstacle() ? Scheme::direct : Scheme::generalized;
    cfg.picard = true;
    cfg.previous = previous;
    return run_backward(coeffs, paths, noise, options, cfg);
}

double skorokhod_residual(const BackwardSolution& sol, const CoefficientSet& coeffs,
                          const ReflectedEnsemble& paths) {
    if (!coeffs.has_obstacle()) throw ValidationError("skorokhod_residual needs an obstacle");
    if (sol.n_paths != paths.n_paths || !(sol.grid == paths.grid)) {
        throw ValidationError("solution and paths do not match");
    }
    const std::size_t n = sol.grid.n_steps();
    double total = 0.0;
    for (std::size_t p = 0; p < sol.n_paths; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dk = sol.k(p, i + 1) - sol.k(p, i);
            if (dk == 0.0) continue;
            const double gap = sol.y(p, i) - coeffs.obstacle(sol.grid.node(i), paths.x(p, i));
            total += std::abs(gap * dk);
        }
    }
    return total / static_cast<double>(sol.n_paths);
}

void write_solution_csv(std::ostream& os, const BackwardSolution& sol,
                        const CoefficientSet& coeffs, const ReflectedEnsemble& paths) {
    const std::size_t n = sol.grid.n_steps();
    os << "time,mean_y,sd_y,mean_k,skorokhod\n";
    for (std::size_t i = 0; i <= n; ++i) {
        double m = 0.0, s2 = 0.0, mk = 0.0, sk = 0.0;
        for (std::size_t p = 0; p < sol.n_paths; ++p) m += sol.y(p, i);
        m /= static_cast<double>(sol.n_paths);
        for (std::size_t p = 0; p < sol.n_paths; ++p) {
            s2 += (sol.y(p, i) - m) * (sol.y(p, i) - m);
            mk += sol.k(p, i);
            if (i < n && coeffs.has_obstacle()) {
                const double dk = sol.k(p, i + 1) - sol.k(p, i);
                if (dk != 0.0) {
                    sk += std::abs((sol.y(p, i) - coeffs.obstacle(sol.grid.node(i), paths.x(p, i))) * dk);
                }
            }
        }
        const double np = static_cast<double>(sol.n_paths);
        fmt::print(os, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", sol.grid.node(i), m,
                   std::sqrt(s2 / np), mk / np, sk / np);
    }
}

}  // namespace rbdsde
