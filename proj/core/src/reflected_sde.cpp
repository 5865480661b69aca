#include "rbdsde/reflected_sde.hpp"

#include "rbdsde/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace rbdsde {
namespace {

class EulerProjection {
public:
    EulerProjection(const Domain& domain, const SdeSpec& spec)
        : domain_(domain), spec_(spec), drift_(spec.dim), vol_(spec.dim * spec.dim),
          pred_(spec.dim) {
        if (spec.dim != domain.dimension()) {
            throw ValidationError("SDE dimension " + std::to_string(spec.dim) +
                                  " does not match domain dimension " +
                                  std::to_string(domain.dimension()));
        }
        if (!spec.drift || !spec.diffusion) throw ValidationError("SDE needs drift and diffusion");
    }

    // Advances `from` by one step into `to`; returns the local-time increment.
    double step(std::span<const double> from, std::span<const double> dw, double dt,
                std::span<double> to, bool& exited) {
        const std::size_t d = spec_.dim;
        spec_.drift(from, drift_);
        spec_.diffusion(from, vol_);
        for (std::size_t i = 0; i < d; ++i) {
            double v = from[i] + drift_[i] * dt;
            for (std::size_t j = 0; j < d; ++j) v += vol_[i * d + j] * dw[j];
            pred_[i] = v;
        }
        if (defining_function(domain_, pred_) >= 0.0) {
            exited = false;
            std::copy(pred_.begin(), pred_.end(), to.begin());
            return 0.0;
        }
        exited = true;
        const auto proj = project_to_closure(domain_, pred_);
        std::copy(proj.point.begin(), proj.point.end(), to.begin());
        return proj.displacement;
    }

private:
    const Domain& domain_;
    const SdeSpec& spec_;
    std::vector<double> drift_;
    std::vector<double> vol_;
    std::vector<double> pred_;
};

std::size_t checked_start(const Domain& domain, const SdeSpec& spec, const StartPoint& start,
                          const TimeGrid& grid) {
    if (start.x.size() != spec.dim) throw ValidationError("start point has wrong dimension");
    if (!in_closure(domain, start.x)) {
        throw ValidationError("start point lies outside the closure of the domain");
    }
    return grid.node_index(start.t);
}

}  // namespace

SdeSpec SdeSpec::affine(std::size_t dim, std::vector<double> drift_constant, double drift_rate,
                        double vol_constant, double vol_rate) {
    if (dim == 0) throw ValidationError("SDE dimension must be positive");
    if (drift_constant.empty()) drift_constant.assign(dim, 0.0);
    if (drift_constant.size() != dim) throw ValidationError("drift constant has wrong dimension");
    SdeSpec spec;
    spec.dim = dim;
    spec.drift = [c = std::move(drift_constant), drift_rate](std::span<const double> x,
                                                              std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = c[i] + drift_rate * x[i];
    };
    spec.diffusion = [vol_constant, vol_rate, dim](std::span<const double> x, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) out[i * dim + i] = vol_constant + vol_rate * x[i];
    };
    spec.lipschitz = std::max({std::abs(drift_rate), std::abs(vol_rate), 1e-12});
    return spec;
}

ReflectedPath simulate_reflected(const Domain& domain, const SdeSpec& spec,
                                 const StartPoint& start, const PathBundle& bundle) {
    const TimeGrid& grid = bundle.grid;
    const std::size_t k0 = checked_start(domain, spec, start, grid);
    if (bundle.w.dim != spec.dim) throw ValidationError("bundle forward dimension != SDE dimension");
    const std::size_t n = grid.n_steps();
    const std::size_t d = spec.dim;
    ReflectedPath path{grid, k0, d, std::vector<double>((n + 1) * d),
                       std::vector<double>(n + 1, 0.0), std::vector<std::uint8_t>(n, 0)};
    for (std::size_t i = 0; i <= k0; ++i) {
        std::copy(start.x.begin(), start.x.end(), path.x_values.begin() + i * d);
    }
    EulerProjection stepper(domain, spec);
    const double dt = grid.dt();
    for (std::size_t i = k0; i < n; ++i) {
        bool exited = false;
        const double da = stepper.step({path.x_values.data() + i * d, d}, bundle.w.row(i), dt,
                                       {path.x_values.data() + (i + 1) * d, d}, exited);
        path.exited[i] = exited ? 1 : 0;
        path.a_values[i + 1] = path.a_values[i] + da;
    }
    return path;
}

ReflectedEnsemble simulate_ensemble(const Domain& domain, const SdeSpec& spec,
                                    const StartPoint& start, const PathEnsemble& ensemble) {
    const TimeGrid& grid = ensemble.grid;
    const std::size_t k0 = checked_start(domain, spec, start, grid);
    if (ensemble.w_dim != spec.dim) {
        throw ValidationError("ensemble forward dimension != SDE dimension");
    }
    const std::size_t n = grid.n_steps();
    const std::size_t d = spec.dim;
    const std::size_t np = ensemble.n_paths;
    ReflectedEnsemble out{grid, k0, d, np, std::vector<double>(np * (n + 1) * d),
                          std::vector<double>(np * (n + 1), 0.0)};
    EulerProjection stepper(domain, spec);
    const double dt = grid.dt();
    for (std::size_t p = 0; p < np; ++p) {
        double* xs = out.x_values.data() + p * (n + 1) * d;
        double* as = out.a_values.data() + p * (n + 1);
        for (std::size_t i = 0; i <= k0; ++i) std::copy(start.x.begin(), start.x.end(), xs + i * d);
        for (std::size_t i = k0; i < n; ++i) {
            bool exited = false;
            const double da = stepper.step({xs + i * d, d}, ensemble.w_increment(p, i), dt,
                                           {xs + (i + 1) * d, d}, exited);
            as[i + 1] = as[i] + da;
        }
    }
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("loglog_slope needs at least two matching samples");
    }
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("loglog_slope needs positive data");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = std::log(x[i]) - mx;
        sxy += u * (std::log(y[i]) - my);
        sxx += u * u;
    }
    if (sxx == 0.0) throw ValidationError("loglog_slope: abscissae are all equal");
    return sxy / sxx;
}

ScalingReport moment_scaling_report(const Domain& domain, const SdeSpec& spec,
                                    const TimeGrid& grid, std::span<const ScalingPair> pairs,
                                    double exponent, std::size_t n_paths, std::uint64_t seed,
                                    double mu) {
    if (!(exponent > 4.0)) throw ValidationError("moment exponent must exceed 4");
    if (n_paths == 0) throw ValidationError("moment_scaling_report needs at least one path");
    const auto ensemble = sample_ensemble(grid, spec.dim, 1, n_paths, seed, 0);
    const std::size_t n = grid.n_steps();
    const std::size_t d = spec.dim;

    ScalingReport report;
    report.exponent = exponent;
    report.mu = mu;
    report.exp_moment_finite = true;

    auto exp_moment = [&](const ReflectedEnsemble& e) {
        double s = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) s += std::exp(mu * e.a(p, n));
        return s / static_cast<double>(n_paths);
    };

    for (const auto& pair : pairs) {
        const auto e1 = simulate_ensemble(domain, spec, pair.first, ensemble);
        const auto e2 = simulate_ensemble(domain, spec, pair.second, ensemble);
        ScalingRow row;
        double gap = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            gap += (pair.first.x[k] - pair.second.x[k]) * (pair.first.x[k] - pair.second.x[k]);
        }
        row.space_gap = std::sqrt(gap);
        row.time_gap = std::abs(pair.first.t - pair.second.t);
        double xm = 0.0, am = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            double sx = 0.0, sa = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const auto a = e1.x(p, i);
                const auto b = e2.x(p, i);
                double dist = 0.0;
                for (std::size_t k = 0; k < d; ++k) dist += (a[k] - b[k]) * (a[k] - b[k]);
                sx = std::max(sx, std::sqrt(dist));
                sa = std::max(sa, std::abs(e1.a(p, i) - e2.a(p, i)));
            }
            xm += std::pow(sx, exponent);
            am += std::pow(sa, exponent);
        }
        row.x_moment = xm / static_cast<double>(n_paths);
        row.a_moment = am / static_cast<double>(n_paths);
        report.rows.push_back(row);
        for (const auto* e : {&e1, &e2}) {
            const double m = exp_moment(*e);
            report.max_exp_local_time = std::max(report.max_exp_local_time, m);
            if (!std::isfinite(m)) report.exp_moment_finite = false;
        }
    }

    auto fit = [&](bool in_space, bool local_time) -> std::optional<double> {
        std::vector<double> gx, gy;
        for (const auto& r : report.rows) {
            const double gap = in_space ? r.space_gap : r.time_gap;
            const double other = in_space ? r.time_gap : r.space_gap;
            const double m = local_time ? r.a_moment : r.x_moment;
            if (other == 0.0 && gap > 0.0 && m > 0.0) {
                gx.push_back(gap);
                gy.push_back(m);
            }
        }
        if (gx.size() < 2) return std::nullopt;
        if (std::all_of(gx.begin(), gx.end(), [&](double v) { return v == gx.front(); })) {
            return std::nullopt;
        }
        return loglog_slope(gx, gy);
    };
    report.x_slope_in_space = fit(true, false);
    report.a_slope_in_space = fit(true, true);
    report.x_slope_in_time = fit(false, false);
    report.a_slope_in_time = fit(false, true);
    return report;
}

void write_path_csv(std::ostream& os, const ReflectedPath& path) {
    os << "step,time";
    for (std::size_t k = 0; k < path.dim; ++k) os << ",x_" << (k + 1);
    os << ",A\n";
    for (std::size_t i = 0; i <= path.grid.n_steps(); ++i) {
        fmt::print(os, "{},{:.17g}", i, path.grid.node(i));
        for (double v : path.x(i)) fmt::print(os, ",{:.17g}", v);
        fmt::print(os, ",{:.17g}\n", path.a_values[i]);
    }
}

}  // namespace rbdsde
