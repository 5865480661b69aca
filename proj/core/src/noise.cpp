#include "rbdsde/noise.hpp"

#include "rbdsde/errors.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

namespace rbdsde {
namespace {

constexpr std::uint32_t kDumpVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 keyed_engine(std::uint64_t seed, NoiseChannel channel, std::uint64_t a,
                             std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(channel));
    h = splitmix64(h ^ a);
    const std::uint64_t h2 = splitmix64(h ^ b);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(h2), static_cast<std::uint32_t>(h2 >> 32)};
    return std::mt19937_64(seq);
}

void fill_normals(std::span<double> out, double scale, std::mt19937_64& engine) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = scale * normal(engine);
}

template <typename T>
void put_le(std::ostream& os, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
        for (std::size_t i = sizeof(T); i-- > 0;) os.put(bytes[i]);
    } else {
        os.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
}

template <typename T>
T get_le(std::istream& is) {
    std::array<char, sizeof(T)> bytes{};
    is.read(bytes.data(), sizeof(T));
    if (!is) throw ValidationError("increment dump truncated");
    if constexpr (std::endian::native == std::endian::big) {
        std::array<char, sizeof(T)> rev{};
        for (std::size_t i = 0; i < sizeof(T); ++i) rev[i] = bytes[sizeof(T) - 1 - i];
        bytes = rev;
    }
    return std::bit_cast<T>(bytes);
}

void check_range(const PathBundle& bundle, std::size_t from, std::size_t to) {
    if (from > to || to > bundle.grid.n_steps()) {
        throw ValidationError("integration range [" + std::to_string(from) + ", " +
                              std::to_string(to) + ") outside grid of " +
                              std::to_string(bundle.grid.n_steps()) + " steps");
    }
}

}  // namespace

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
    if (n_steps == 0) throw ValidationError("time grid needs at least one step");
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
        throw ValidationError("time grid needs finite t_start < t_end");
    }
}

std::size_t TimeGrid::node_index(double t) const {
    const double pos = (t - t_start_) / dt();
    const double rounded = std::round(pos);
    if (rounded < 0.0 || rounded > static_cast<double>(n_steps_) ||
        std::abs(pos - rounded) > 1e-9) {
        throw ValidationError("time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(rounded);
}

PathBundle PathEnsemble::bundle(std::size_t p) const {
    PathBundle out{grid, IncrementTable{grid.n_steps(), w_dim, {}}, b, seed, b_stream};
    const auto src = w_path(p);
    out.w.values.assign(src.begin(), src.end());
    return out;
}

IncrementTable sample_increments(const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                 NoiseChannel channel, std::uint64_t key_a, std::uint64_t key_b) {
    if (dim == 0) throw ValidationError("Brownian dimension must be at least 1");
    IncrementTable table{grid.n_steps(), dim, std::vector<double>(grid.n_steps() * dim)};
    auto engine = keyed_engine(seed, channel, key_a, key_b);
    fill_normals(table.values, std::sqrt(grid.dt()), engine);
    return table;
}

PathBundle sample_bundle(const TimeGrid& grid, std::size_t d, std::size_t l, std::uint64_t seed,
                         std::uint64_t stream_id) {
    if (d == 0 || l == 0) throw ValidationError("sample_bundle: d and l must be at least 1");
    return PathBundle{grid,
                      sample_increments(grid, d, seed, NoiseChannel::forward, stream_id, 0),
                      sample_increments(grid, l, seed, NoiseChannel::backward, stream_id, 0),
                      seed, stream_id};
}

PathEnsemble sample_ensemble(const TimeGrid& grid, std::size_t d, std::size_t l,
                             std::size_t n_paths, std::uint64_t seed, std::uint64_t b_stream) {
    if (d == 0 || l == 0) throw ValidationError("sample_ensemble: d and l must be at least 1");
    if (n_paths == 0) throw ValidationError("sample_ensemble: need at least one path");
    PathEnsemble ens{grid, d, l, n_paths, seed, b_stream,
                     sample_increments(grid, l, seed, NoiseChannel::backward, b_stream, 0), {}};
    const std::size_t stride = grid.n_steps() * d;
    ens.w.resize(n_paths * stride);
    const double scale = std::sqrt(grid.dt());
    for (std::size_t p = 0; p < n_paths; ++p) {
        auto engine = keyed_engine(seed, NoiseChannel::forward, b_stream, p);
        fill_normals({ens.w.data() + p * stride, stride}, scale, engine);
    }
    return ens;
}

PathBundle coarsen(const PathBundle& bundle, std::size_t factor) {
    const std::size_t n = bundle.grid.n_steps();
    if (factor == 0 || n % factor != 0) {
        throw ValidationError("coarsen: factor must divide the number of steps");
    }
    const std::size_t m = n / factor;
    auto sum_rows = [&](const IncrementTable& src) {
        IncrementTable out{m, src.dim, std::vector<double>(m * src.dim, 0.0)};
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = out.row(i / factor);
            auto row = src.row(i);
            for (std::size_t k = 0; k < src.dim; ++k) dst[k] += row[k];
        }
        return out;
    };
    return PathBundle{TimeGrid(bundle.grid.t_start(), bundle.grid.t_end(), m), sum_rows(bundle.w),
                      sum_rows(bundle.b), bundle.seed, bundle.stream_id};
}

RightNodeSamples::RightNodeSamples(std::size_t steps, std::size_t dim)
    : table_{steps, dim, std::vector<double>(steps * dim, 0.0)} {}

RightNodeSamples RightNodeSamples::from_nodes(
    std::size_t steps, std::size_t dim,
    const std::function<void(std::size_t node, std::span<double>)>& fn) {
    RightNodeSamples s(steps, dim);
    for (std::size_t i = 0; i < steps; ++i) fn(i + 1, s.at_step(i));
    return s;
}

double backward_ito_integral(const RightNodeSamples& values, const PathBundle& bundle,
                             std::size_t from_step, std::size_t to_step) {
    check_range(bundle, from_step, to_step);
    if (values.steps() != bundle.grid.n_steps() || values.dim() != bundle.b.dim) {
        throw ValidationError("backward_ito_integral: integrand shape does not match bundle");
    }
    double sum = 0.0;
    for (std::size_t i = from_step; i < to_step; ++i) {
        const auto v = values.at_step(i);
        const auto db = bundle.b.row(i);
        for (std::size_t k = 0; k < v.size(); ++k) sum += v[k] * db[k];
    }
    return sum;
}

double backward_stratonovich_integral(const StateIntegrand& integrand,
                                      std::span<const double> states, const PathBundle& bundle,
                                      std::size_t from_step, std::size_t to_step) {
    check_range(bundle, from_step, to_step);
    if (states.size() != bundle.grid.n_steps() + 1) {
        throw ValidationError("backward_stratonovich_integral: need one state per node");
    }
    const std::size_t l = bundle.b.dim;
    std::vector<double> g(l), g_mid(l);
    double sum = 0.0;
    for (std::size_t i = from_step; i < to_step; ++i) {
        const double t_right = bundle.grid.node(i + 1);
        const auto db = bundle.b.row(i);
        const double y = states[i + 1];
        integrand(t_right, y, g);
        double pred = y;
        for (std::size_t k = 0; k < l; ++k) pred += g[k] * db[k];
        const double t_mid = 0.5 * (bundle.grid.node(i) + t_right);
        integrand(t_mid, 0.5 * (y + pred), g_mid);
        for (std::size_t k = 0; k < l; ++k) sum += g_mid[k] * db[k];
    }
    return sum;
}

void write_bundle(const std::filesystem::path& path, const PathBundle& bundle) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
    os.write("RBDS", 4);
    put_le<std::uint32_t>(os, kDumpVersion);
    put_le<std::uint64_t>(os, bundle.grid.n_steps());
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(bundle.w.dim));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(bundle.b.dim));
    put_le<std::uint64_t>(os, bundle.seed);
    for (double v : bundle.w.values) put_le<double>(os, v);
    for (double v : bundle.b.values) put_le<double>(os, v);
    if (!os) throw ValidationError("failed writing " + path.string());
}

PathBundle read_bundle(const std::filesystem::path& path, double t_start, double t_end,
                       std::uint64_t stream_id) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open increment dump " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "RBDS", 4) != 0) {
        throw ValidationError(path.string() + " is not an increment dump");
    }
    const auto version = get_le<std::uint32_t>(is);
    if (version != kDumpVersion) {
        throw ValidationError("unsupported increment dump version " + std::to_string(version));
    }
    const auto n = get_le<std::uint64_t>(is);
    const auto d = get_le<std::uint32_t>(is);
    const auto l = get_le<std::uint32_t>(is);
    const auto seed = get_le<std::uint64_t>(is);
    TimeGrid grid(t_start, t_end, n);
    PathBundle bundle{grid, IncrementTable{n, d, std::vector<double>(n * d)},
                      IncrementTable{n, l, std::vector<double>(n * l)}, seed, stream_id};
    for (double& v : bundle.w.values) v = get_le<double>(is);
    for (double& v : bundle.b.values) v = get_le<double>(is);
    return bundle;
}

}  // namespace rbdsde
