#pragma once

#include "rbdsde/bdsde_solver.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rbdsde {

/// Weights of the contraction norm
///   c_bar E int e^{mu s + beta A_s} |Y_s|^2 ds
///     + beta_bar E int e^{mu s + beta A_s} |Y_s|^2 dA_s
///     + E int e^{mu s + beta A_s} |Z_s|^2 ds
/// with c_bar = c / alpha and beta_bar = |beta| / alpha'.
struct NormWeights {
    double mu = 0.0;
    double beta = 0.0;  // signed, <= 0
    double c_bar = 1.0;
    double beta_bar = 0.0;
    double alpha_prime = 0.5;

    /// alpha' defaults to (1 + alpha) / 2 and mu to the value solving
    /// mu - c / (1 - alpha') - 1 + alpha' = alpha' c / alpha.
    static NormWeights from_constants(const StructuralConstants& constants,
                                      std::optional<double> alpha_prime = std::nullopt,
                                      std::optional<double> mu = std::nullopt);
};

/// Discrete squared weighted distance between (Y_A, Z_A) and (Y_B, Z_B) on
/// shared paths, integrated from the start node to the horizon.
double weighted_distance(const BackwardSolution& a, const BackwardSolution& b,
                         const NormWeights& weights, const ReflectedEnsemble& paths);

struct PicardReport {
    std::vector<double> distances;          // distance between iterates k and k-1
    std::vector<double> contraction_ratios; // distances[k] / distances[k-1]
    double predicted_ratio = 0.0;           // alpha / alpha'
    double noise_floor = 1e-14;
    bool converged = false;
    std::size_t iterations = 0;
};

struct PicardResult {
    BackwardSolution solution;
    PicardReport report;
};

/// Fixed-point iteration of the solve map with the backward integrand frozen
/// at the previous iterate. Non-convergence is reported, not thrown.
PicardResult picard_solve(const CoefficientSet& coeffs, const ReflectedEnsemble& paths,
                          const PathEnsemble& noise, const NormWeights& weights, double tolerance,
                          std::size_t max_iterations, const SolverOptions& options = {});

struct ViolationReport {
    std::vector<std::size_t> per_node;  // paths with Y_A - Y_B > threshold, per node
    std::size_t total = 0;
    double worst = 0.0;                 // max over paths and nodes of Y_A - Y_B
    double threshold = 0.0;
};

/// Empirical ordering check Y_A <= Y_B for non-reflected equations sharing
/// the backward coefficient g. Rejects obstacles and differing g.
ViolationReport comparison_check(const CoefficientSet& lower, const CoefficientSet& upper,
                                 const ReflectedEnsemble& paths, const PathEnsemble& noise,
                                 const SolverOptions& options = {});

void write_picard_csv(std::ostream& os, const PicardReport& report);
void write_violation_csv(std::ostream& os, const ViolationReport& report, const TimeGrid& grid);
void print_picard_summary(std::ostream& os, const PicardReport& report);
void print_violation_summary(std::ostream& os, const ViolationReport& report);

}  // namespace rbdsde
