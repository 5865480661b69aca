#pragma once

#include "rbdsde/geometry.hpp"
#include "rbdsde/noise.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rbdsde {

using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Drift b: R^d -> R^d and diffusion sigma: R^d -> R^{d x d} (row-major).
/// `lipschitz` is the declared common Lipschitz bound; it is metadata only.
struct SdeSpec {
    std::size_t dim = 1;
    VectorField drift;
    VectorField diffusion;
    double lipschitz = 1.0;

    /// b_i(x) = drift_constant_i + drift_rate * x_i,
    /// sigma(x) = diag(vol_constant + vol_rate * x_i).
    static SdeSpec affine(std::size_t dim, std::vector<double> drift_constant, double drift_rate,
                          double vol_constant, double vol_rate);
};

struct StartPoint {
    double t = 0.0;
    Point x;
};

/// One simulated trajectory of the reflected diffusion and its boundary
/// local time. Nodes before the start step hold the frozen start state.
struct ReflectedPath {
    TimeGrid grid;
    std::size_t start_step = 0;
    std::size_t dim = 1;
    std::vector<double> x_values;        // (N+1) x d
    std::vector<double> a_values;        // N+1, nondecreasing, a_0 = 0
    std::vector<std::uint8_t> exited;    // N, 1 if the Euler predictor left the closure

    std::span<const double> x(std::size_t i) const { return {x_values.data() + i * dim, dim}; }
};

/// Reflected paths for every forward path of an ensemble, all from one start.
struct ReflectedEnsemble {
    TimeGrid grid;
    std::size_t start_step = 0;
    std::size_t dim = 1;
    std::size_t n_paths = 0;
    std::vector<double> x_values;  // n_paths x (N+1) x d
    std::vector<double> a_values;  // n_paths x (N+1)

    std::span<const double> x(std::size_t p, std::size_t i) const {
        return {x_values.data() + (p * (grid.n_steps() + 1) + i) * dim, dim};
    }
    double a(std::size_t p, std::size_t i) const { return a_values[p * (grid.n_steps() + 1) + i]; }
    double da(std::size_t p, std::size_t i) const { return a(p, i + 1) - a(p, i); }
};

/// Euler-Maruyama step followed by projection onto the closure; the
/// projection length is the local-time increment.
ReflectedPath simulate_reflected(const Domain& domain, const SdeSpec& spec,
                                 const StartPoint& start, const PathBundle& bundle);

ReflectedEnsemble simulate_ensemble(const Domain& domain, const SdeSpec& spec,
                                    const StartPoint& start, const PathEnsemble& ensemble);

struct ScalingPair {
    StartPoint first;
    StartPoint second;
};

struct ScalingRow {
    double space_gap = 0.0;  // |x - x'|
    double time_gap = 0.0;   // |t - t'|
    double x_moment = 0.0;   // E sup_s |X^{t,x}_s - X^{t',x'}_s|^p
    double a_moment = 0.0;   // E sup_s |A^{t,x}_s - A^{t',x'}_s|^p
};

struct ScalingReport {
    double exponent = 0.0;
    std::vector<ScalingRow> rows;
    /// Log-log slopes against |x - x'| (rows with equal start times) and
    /// |t - t'| (rows with equal start points); empty with fewer than two
    /// usable rows.
    std::optional<double> x_slope_in_space;
    std::optional<double> a_slope_in_space;
    std::optional<double> x_slope_in_time;
    std::optional<double> a_slope_in_time;
    double mu = 0.0;
    double max_exp_local_time = 0.0;  // max over starts of E exp(mu A_T)
    bool exp_moment_finite = false;
};

/// Synchronously coupled moment estimates: both members of a pair are
/// driven by the same forward paths. Requires exponent > 4.
ScalingReport moment_scaling_report(const Domain& domain, const SdeSpec& spec,
                                    const TimeGrid& grid, std::span<const ScalingPair> pairs,
                                    double exponent, std::size_t n_paths, std::uint64_t seed,
                                    double mu = 1.0);

/// CSV with columns step,time,x_1..x_d,A.
void write_path_csv(std::ostream& os, const ReflectedPath& path);

/// Ordinary least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rbdsde
