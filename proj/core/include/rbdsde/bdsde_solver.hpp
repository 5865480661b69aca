#pragma once

#include "rbdsde/coefficients.hpp"
#include "rbdsde/noise.hpp"
#include "rbdsde/reflected_sde.hpp"
#include "rbdsde/regression.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace rbdsde {

enum class Scheme { generalized, penalized, direct };

std::string_view to_string(Scheme scheme);

struct SolverOptions {
    RegressionBasis basis;
    /// Re-evaluate f and phi at the first Y estimate and regress once more.
    bool picard_pass = false;
    /// Largest n * dt for the explicit penalty update.
    double stiffness_cap = 0.5;
    /// Above the cap, use the closed-form implicit penalty update instead of
    /// failing.
    bool implicit_penalty = true;
};

/// Per-path, per-node samples of (Y, Z, K) under one frozen backward path.
struct BackwardSolution {
    TimeGrid grid{0.0, 1.0, 1};
    std::size_t n_paths = 0;
    std::size_t dim = 1;
    std::size_t start_step = 0;
    std::vector<double> y_values;  // n_paths x (N+1)
    std::vector<double> z_values;  // n_paths x N x d
    std::vector<double> k_values;  // n_paths x (N+1), k(p, 0) = 0
    std::uint64_t b_stream = 0;
    Scheme scheme = Scheme::generalized;
    double penalty = 0.0;
    bool implicit_penalty_used = false;
    RegressionBasis basis;
    /// Monte Carlo standard error of Y at the start node.
    double start_standard_error = 0.0;

    double y(std::size_t p, std::size_t i) const { return y_values[p * (grid.n_steps() + 1) + i]; }
    double k(std::size_t p, std::size_t i) const { return k_values[p * (grid.n_steps() + 1) + i]; }
    std::span<const double> z(std::size_t p, std::size_t i) const {
        return {z_values.data() + (p * grid.n_steps() + i) * dim, dim};
    }
    /// Y at the start node (identical on every path when the start is a point).
    double start_value() const;
    double mean_y(std::size_t i) const;
};

/// Time-discretization plus Monte Carlo resolution of a run: dt + 1/sqrt(n).
/// Used as the unit for every ordering and domination tolerance.
double scheme_tolerance(const TimeGrid& grid, std::size_t n_paths);

/// Generalized equation without obstacle; g must not depend on z.
BackwardSolution solve_generalized(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                                   const PathEnsemble& noise, const SolverOptions& options = {});

/// Penalized driver f + n (y - h)^-, with K^n accumulated from the penalty.
BackwardSolution solve_penalized(const CoefficientSet& coeffs, double penalty,
                                 const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                 const SolverOptions& options = {});

/// Reflection by projection onto the obstacle after every backward step.
BackwardSolution solve_reflected_direct(const CoefficientSet& coeffs,
                                        const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                        const SolverOptions& options = {});

/// One application of the fixed-point map: the backward integrand is
/// g(t, X, Y_prev, Z_prev) taken from `previous` (which may be null, meaning
/// the zero process). Uses the direct scheme when an obstacle is present.
BackwardSolution apply_picard_map(const CoefficientSet& coeffs, const BackwardSolution* previous,
                                  const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                  const SolverOptions& options = {});

/// Monte Carlo average of sum_i |(Y_i - h(t_i, X_i)) dK_i|.
double skorokhod_residual(const BackwardSolution& sol, const CoefficientSet& coeffs,
                          const ReflectedEnsemble& paths);

/// CSV with columns time,mean_y,sd_y,mean_k,skorokhod.
void write_solution_csv(std::ostream& os, const BackwardSolution& sol,
                        const CoefficientSet& coeffs, const ReflectedEnsemble& paths);

}  // namespace rbdsde
