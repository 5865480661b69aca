#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace rbdsde {

/// Uniform grid t_i = t_start + i * dt, i = 0..n_steps.
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, std::size_t n_steps);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }
    double node(std::size_t i) const noexcept {
        return i == n_steps_ ? t_end_ : t_start_ + static_cast<double>(i) * dt();
    }
    /// Index of the node equal to t (within 1e-9 * dt); throws otherwise.
    std::size_t node_index(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double t_start_;
    double t_end_;
    std::size_t n_steps_;
};

/// steps x dim table of Brownian increments, row i holding the increment
/// over [t_i, t_{i+1}].
struct IncrementTable {
    std::size_t steps = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

/// One forward path W (R^d) and one backward path B (R^l) on a shared grid.
struct PathBundle {
    TimeGrid grid;
    IncrementTable w;
    IncrementTable b;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// Many forward paths sharing a single backward path: the discrete image of
/// conditioning on the backward noise. Forward path p is reproducible from
/// (seed, b_stream, p) alone.
struct PathEnsemble {
    TimeGrid grid;
    std::size_t w_dim = 0;
    std::size_t b_dim = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t b_stream = 0;
    IncrementTable b;
    std::vector<double> w;  // n_paths x n_steps x w_dim

    std::span<const double> w_path(std::size_t p) const {
        const std::size_t stride = grid.n_steps() * w_dim;
        return {w.data() + p * stride, stride};
    }
    std::span<const double> w_increment(std::size_t p, std::size_t step) const {
        return {w.data() + (p * grid.n_steps() + step) * w_dim, w_dim};
    }
    PathBundle bundle(std::size_t p) const;
};

/// Standard normal stream keyed by (seed, channel, a, b). Distinct keys give
/// statistically independent streams; the same key reproduces the stream.
enum class NoiseChannel : std::uint64_t { forward = 0x57, backward = 0x42 };

IncrementTable sample_increments(const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                 NoiseChannel channel, std::uint64_t key_a, std::uint64_t key_b);

PathBundle sample_bundle(const TimeGrid& grid, std::size_t d, std::size_t l, std::uint64_t seed,
                         std::uint64_t stream_id);

/// sample_ensemble(..., s).bundle(0) equals sample_bundle(..., s).
PathEnsemble sample_ensemble(const TimeGrid& grid, std::size_t d, std::size_t l,
                             std::size_t n_paths, std::uint64_t seed, std::uint64_t b_stream);

/// Same Brownian path on a grid `factor` times coarser (increments summed).
PathBundle coarsen(const PathBundle& bundle, std::size_t factor);

/// Integrand samples for the backward Ito sum. Entry for step i is the
/// integrand value at the right node t_{i+1}; there is deliberately no way to
/// supply left-node values.
class RightNodeSamples {
public:
    RightNodeSamples(std::size_t steps, std::size_t dim);

    /// Evaluates fn(i + 1) for every step i, filling the row for step i.
    static RightNodeSamples from_nodes(std::size_t steps, std::size_t dim,
                                       const std::function<void(std::size_t node, std::span<double>)>& fn);

    std::size_t steps() const noexcept { return table_.steps; }
    std::size_t dim() const noexcept { return table_.dim; }
    std::span<const double> at_step(std::size_t i) const { return table_.row(i); }
    std::span<double> at_step(std::size_t i) { return table_.row(i); }

private:
    IncrementTable table_;
};

/// sum_{i in [from, to)} <value(t_{i+1}), dB_i>.
double backward_ito_integral(const RightNodeSamples& values, const PathBundle& bundle,
                             std::size_t from_step, std::size_t to_step);

/// Integrand of a state-dependent backward integral: (t, state) -> R^l.
using StateIntegrand = std::function<void(double t, double state, std::span<double> out)>;

/// Midpoint backward Stratonovich sum. For step i the integrand is evaluated
/// at the average of the right-node state y_{i+1} and the predictor
/// y_{i+1} + <g(t_{i+1}, y_{i+1}), dB_i>. `states` holds the state at every
/// node (n_steps + 1 values).
double backward_stratonovich_integral(const StateIntegrand& integrand,
                                      std::span<const double> states, const PathBundle& bundle,
                                      std::size_t from_step, std::size_t to_step);

/// Binary increment dump: "RBDS", u32 version, u64 N, u32 d, u32 l, u64 seed,
/// then N*d forward increments and N*l backward increments, all
/// little-endian, row-major.
void write_bundle(const std::filesystem::path& path, const PathBundle& bundle);
PathBundle read_bundle(const std::filesystem::path& path, double t_start, double t_end,
                       std::uint64_t stream_id = 0);

}  // namespace rbdsde
