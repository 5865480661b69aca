#include "rbdsde/doss_sussman.hpp"

#include "rbdsde/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <string>

namespace rbdsde {
namespace {

// Value and first/second partial derivatives of every component of g at one
// (t, x, y), by central differences.
struct NoiseJet {
    std::size_t l = 0;
    std::size_t d = 0;
    std::vector<double> g, gy, gyy;  // l
    std::vector<double> gx, gxy;     // l x d
    std::vector<double> gxx;         // l x d x d

    void resize(std::size_t l_, std::size_t d_) {
        l = l_;
        d = d_;
        g.assign(l, 0.0);
        gy.assign(l, 0.0);
        gyy.assign(l, 0.0);
        gx.assign(l * d, 0.0);
        gxy.assign(l * d, 0.0);
        gxx.assign(l * d * d, 0.0);
    }
};

class JetEvaluator {
public:
    JetEvaluator(const NoiseCoefficient& g, std::size_t d) : g_(g), d_(d), xs_(d) {
        for (auto& b : bufs_) b.assign(g.dim, 0.0);
    }

    void eval(double t, std::span<const double> x, double y, NoiseJet& jet) {
        const std::size_t l = g_.dim;
        jet.resize(l, d_);
        const double hy = 1e-4 * std::max(1.0, std::abs(y));
        call(t, x, y, bufs_[0]);
        call(t, x, y + hy, bufs_[1]);
        call(t, x, y - hy, bufs_[2]);
        for (std::size_t c = 0; c < l; ++c) {
            jet.g[c] = bufs_[0][c];
            jet.gy[c] = (bufs_[1][c] - bufs_[2][c]) / (2.0 * hy);
            jet.gyy[c] = (bufs_[1][c] - 2.0 * bufs_[0][c] + bufs_[2][c]) / (hy * hy);
        }
        std::copy(x.begin(), x.end(), xs_.begin());
        for (std::size_t a = 0; a < d_; ++a) {
            const double ha = 1e-4 * std::max(1.0, std::abs(x[a]));
            xs_[a] = x[a] + ha;
            call(t, xs_, y, bufs_[1]);
            call(t, xs_, y + hy, bufs_[3]);
            call(t, xs_, y - hy, bufs_[4]);
            xs_[a] = x[a] - ha;
            call(t, xs_, y, bufs_[2]);
            call(t, xs_, y + hy, bufs_[5]);
            call(t, xs_, y - hy, bufs_[6]);
            xs_[a] = x[a];
            for (std::size_t c = 0; c < l; ++c) {
                jet.gx[c * d_ + a] = (bufs_[1][c] - bufs_[2][c]) / (2.0 * ha);
                jet.gxx[(c * d_ + a) * d_ + a] =
                    (bufs_[1][c] - 2.0 * bufs_[0][c] + bufs_[2][c]) / (ha * ha);
                jet.gxy[c * d_ + a] = (bufs_[3][c] - bufs_[4][c] - bufs_[5][c] + bufs_[6][c]) /
                                      (4.0 * ha * hy);
            }
            for (std::size_t b = a + 1; b < d_; ++b) {
                const double hb = 1e-4 * std::max(1.0, std::abs(x[b]));
                const double sa[4] = {1, 1, -1, -1};
                const double sb[4] = {1, -1, 1, -1};
                for (int q = 0; q < 4; ++q) {
                    xs_[a] = x[a] + sa[q] * ha;
                    xs_[b] = x[b] + sb[q] * hb;
                    call(t, xs_, y, bufs_[3 + q]);
                }
                xs_[a] = x[a];
                xs_[b] = x[b];
                for (std::size_t c = 0; c < l; ++c) {
                    const double v =
                        (bufs_[3][c] - bufs_[4][c] - bufs_[5][c] + bufs_[6][c]) / (4.0 * ha * hb);
                    jet.gxx[(c * d_ + a) * d_ + b] = v;
                    jet.gxx[(c * d_ + b) * d_ + a] = v;
                }
            }
        }
    }

private:
    void call(double t, std::span<const double> x, double y, std::vector<double>& out) {
        g_.value(t, x, y, {}, out);
    }

    const NoiseCoefficient& g_;
    std::size_t d_;
    std::vector<double> xs_;
    std::array<std::vector<double>, 7> bufs_;
};

// State of the flow and its variational equations for the parameters
// theta = (y, x_1, ..., x_d).
struct FlowState {
    double eta = 0.0;
    std::vector<double> j;  // m
    std::vector<double> h;  // m x m
};

// Increment of g along the state for every parameter: first and second
// derivatives of theta -> <g(t, x(theta), eta(theta)), dB>.
void flow_increment(const NoiseJet& jet, const FlowState& s, std::span<const double> db,
                    double& value, std::vector<double>& dj, std::vector<double>& dh) {
    const std::size_t d = jet.d;
    const std::size_t m = d + 1;
    value = 0.0;
    std::fill(dj.begin(), dj.end(), 0.0);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < jet.l; ++c) {
        const double w = db[c];
        if (w == 0.0) continue;
        value += jet.g[c] * w;
        for (std::size_t a = 0; a < m; ++a) {
            double da = jet.gy[c] * s.j[a];
            if (a > 0) da += jet.gx[c * d + a - 1];
            dj[a] += da * w;
            for (std::size_t b = 0; b < m; ++b) {
                double dab = jet.gyy[c] * s.j[a] * s.j[b] + jet.gy[c] * s.h[a * m + b];
                if (b > 0) dab += jet.gxy[c * d + b - 1] * s.j[a];
                if (a > 0) dab += jet.gxy[c * d + a - 1] * s.j[b];
                if (a > 0 && b > 0) dab += jet.gxx[(c * d + a - 1) * d + b - 1];
                dh[a * m + b] += dab * w;
            }
        }
    }
}

double lagrange_weight(const double nodes[4], std::size_t k, double u) {
    double w = 1.0;
    for (std::size_t q = 0; q < 4; ++q) {
        if (q != k) w *= (u - nodes[q]) / (nodes[k] - nodes[q]);
    }
    return w;
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

}  // namespace

FlowSamples FlowSamples::at_point(std::span<const double> x, double y_min, double y_max,
                                  std::size_t y_points) {
    FlowSamples s;
    for (double v : x) s.x_axes.push_back({v});
    s.y_min = y_min;
    s.y_max = y_max;
    s.y_points = y_points;
    return s;
}

double FlowField::y_sample(std::size_t k) const noexcept {
    const double step = (samples_.y_max - samples_.y_min) / static_cast<double>(samples_.y_points - 1);
    return k + 1 == samples_.y_points ? samples_.y_max : samples_.y_min + static_cast<double>(k) * step;
}

Point FlowField::x_sample(std::size_t j) const {
    Point x(x_dim());
    for (std::size_t a = x_dim(); a-- > 0;) {
        const auto& axis = samples_.x_axes[a];
        x[a] = axis[j % axis.size()];
        j /= axis.size();
    }
    return x;
}

double FlowField::min_d_y() const {
    return d_y_.empty() ? 1.0 : *std::min_element(d_y_.begin(), d_y_.end());
}

void FlowField::locate_x(std::span<const double> x, std::vector<std::size_t>& lo,
                         std::vector<double>& w) const {
    const std::size_t d = x_dim();
    if (x.size() != d) throw ValidationError("flow evaluation: wrong state dimension");
    lo.assign(d, 0);
    w.assign(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        const auto& axis = samples_.x_axes[a];
        if (axis.size() == 1) continue;
        const double span = axis.back() - axis.front();
        const double tol = 1e-9 * span;
        if (x[a] < axis.front() - tol || x[a] > axis.back() + tol) {
            throw NumericalError(fmt::format("flow evaluation outside tabulated x range: x_{} = {}",
                                             a + 1, x[a]));
        }
        auto it = std::upper_bound(axis.begin(), axis.end(), x[a]);
        std::size_t hi = static_cast<std::size_t>(it - axis.begin());
        hi = std::clamp<std::size_t>(hi, 1, axis.size() - 1);
        lo[a] = hi - 1;
        w[a] = std::clamp((x[a] - axis[hi - 1]) / (axis[hi] - axis[hi - 1]), 0.0, 1.0);
    }
}

namespace {

// (table entry, weight) pairs of the interpolation stencil.
struct Stencil {
    std::vector<std::pair<std::size_t, double>> terms;
};

}  // namespace

FlowSample FlowField::sample(double t, std::span<const double> x, double y) const {
    const std::size_t d = x_dim();
    // time
    const double t0 = grid_.t_start();
    const double t1 = grid_.t_end();
    const double dt = grid_.dt();
    if (t < t0 - 1e-9 * dt || t > t1 + 1e-9 * dt) {
        throw NumericalError(fmt::format("flow evaluation outside tabulated time range: t = {}", t));
    }
    double u_t = std::clamp((t - t0) / dt, 0.0, static_cast<double>(grid_.n_steps()));
    std::size_t i_lo = static_cast<std::size_t>(std::floor(u_t));
    double w_t = u_t - static_cast<double>(i_lo);
    if (w_t > 1.0 - 1e-9) {
        ++i_lo;
        w_t = 0.0;
    } else if (w_t < 1e-9) {
        w_t = 0.0;
    }
    if (i_lo >= grid_.n_steps()) {
        i_lo = grid_.n_steps();
        w_t = 0.0;
    }
    // y
    const std::size_t ny = samples_.y_points;
    const double step = (samples_.y_max - samples_.y_min) / static_cast<double>(ny - 1);
    if (y < samples_.y_min - 1e-9 * step || y > samples_.y_max + 1e-9 * step) {
        throw NumericalError(fmt::format(
            "flow evaluation outside tabulated y range [{}, {}]: y = {}", samples_.y_min,
            samples_.y_max, y));
    }
    const double u_y = (y - samples_.y_min) / step;
    const std::size_t base = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(0.0, std::floor(u_y) - 1.0)), ny - 4);
    const double nodes[4] = {0.0, 1.0, 2.0, 3.0};
    double wy[4];
    for (std::size_t k = 0; k < 4; ++k) wy[k] = lagrange_weight(nodes, k, u_y - static_cast<double>(base));
    // x
    std::vector<std::size_t> lo;
    std::vector<double> wx;
    locate_x(x, lo, wx);

    Stencil st;
    const std::size_t corners = std::size_t{1} << d;
    for (int tt = 0; tt < (w_t > 0.0 ? 2 : 1); ++tt) {
        const double wt = tt == 0 ? 1.0 - w_t : w_t;
        const std::size_t node = i_lo + static_cast<std::size_t>(tt);
        for (std::size_t corner = 0; corner < corners; ++corner) {
            double wc = wt;
            std::size_t j = 0;
            bool skip = false;
            for (std::size_t a = 0; a < d; ++a) {
                const auto& axis = samples_.x_axes[a];
                const bool upper = (corner >> a) & 1U;
                std::size_t idx = lo[a];
                if (axis.size() == 1) {
                    if (upper) {
                        skip = true;
                        break;
                    }
                } else {
                    idx += upper ? 1 : 0;
                    wc *= upper ? wx[a] : 1.0 - wx[a];
                }
                j = j * axis.size() + idx;
            }
            if (skip || wc == 0.0) continue;
            for (std::size_t k = 0; k < 4; ++k) {
                st.terms.emplace_back(index(node, j, base + k), wc * wy[k]);
            }
        }
    }

    FlowSample s;
    s.eta = 0.0;
    s.d_y = 0.0;
    s.d_yy = 0.0;
    s.d_x.assign(d, 0.0);
    s.d_xy.assign(d, 0.0);
    s.d_xx.assign(d * d, 0.0);
    for (const auto& [e, w] : st.terms) {
        s.eta += w * eta_[e];
        s.d_y += w * d_y_[e];
        s.d_yy += w * d_yy_[e];
        for (std::size_t a = 0; a < d; ++a) {
            s.d_x[a] += w * d_x_[e * d + a];
            s.d_xy[a] += w * d_xy_[e * d + a];
            for (std::size_t b = 0; b < d; ++b) s.d_xx[a * d + b] += w * d_xx_[e * d * d + a * d + b];
        }
    }
    return s;
}

double FlowField::eta(double t, std::span<const double> x, double y) const {
    return sample(t, x, y).eta;
}

double FlowField::inverse(double t, std::span<const double> x, double v) const {
    const double lo = samples_.y_min;
    const double hi = samples_.y_max;
    const auto f = [&](double y) { return eta(t, x, y) - v; };
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (f_lo > 0.0 || f_hi < 0.0) {
        throw NumericalError(fmt::format("flow inversion: v = {} outside tabulated image [{}, {}]",
                                         v, f_lo + v, f_hi + v));
    }
    std::uintmax_t max_iter = 200;
    const auto tol = [](double a, double b) {
        return std::abs(b - a) <= 1e-14 * (1.0 + std::abs(a) + std::abs(b));
    };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
    const double y = 0.5 * (a + b);
    if (std::abs(f(y)) > 1e-10 * (1.0 + std::abs(v))) {
        throw NumericalError(fmt::format("flow inversion did not reach tolerance at v = {}", v));
    }
    return y;
}

FlowField solve_flow(const NoiseCoefficient& g, const PathBundle& bundle,
                     const FlowSamples& samples) {
    if (g.depends_on_z) throw ValidationError("flow equation needs g independent of z");
    if (!g.is_zero() && g.dim != bundle.b.dim) {
        throw ValidationError("noise coefficient dimension does not match backward noise");
    }
    if (samples.x_axes.empty()) throw ValidationError("flow samples need at least one x axis");
    for (const auto& axis : samples.x_axes) {
        if (axis.empty()) throw ValidationError("flow sample axis is empty");
        for (std::size_t q = 1; q < axis.size(); ++q) {
            if (!(axis[q] > axis[q - 1])) throw ValidationError("flow sample axis must be increasing");
        }
    }
    if (samples.y_points < 4 || !(samples.y_max > samples.y_min)) {
        throw ValidationError("flow needs at least 4 increasing y samples");
    }

    FlowField field;
    field.grid_ = bundle.grid;
    field.samples_ = samples;
    field.b_stream_ = bundle.stream_id;
    field.x_count_ = 1;
    for (const auto& axis : samples.x_axes) field.x_count_ *= axis.size();
    const std::size_t d = samples.x_axes.size();
    const std::size_t m = d + 1;
    const std::size_t n = bundle.grid.n_steps();
    const std::size_t ny = samples.y_points;
    const std::size_t entries = (n + 1) * field.x_count_ * ny;
    field.eta_.assign(entries, 0.0);
    field.d_y_.assign(entries, 1.0);
    field.d_yy_.assign(entries, 0.0);
    field.d_x_.assign(entries * d, 0.0);
    field.d_xy_.assign(entries * d, 0.0);
    field.d_xx_.assign(entries * d * d, 0.0);

    JetEvaluator jets(g, d);
    NoiseJet jet1, jet2;
    FlowState s, pred;
    s.j.assign(m, 0.0);
    s.h.assign(m * m, 0.0);
    pred = s;
    double v1 = 0.0, v2 = 0.0;
    std::vector<double> dj1(m), dj2(m), dh1(m * m), dh2(m * m);

    const auto store = [&](std::size_t i, std::size_t j, std::size_t k, const FlowState& st) {
        const std::size_t e = field.index(i, j, k);
        field.eta_[e] = st.eta;
        field.d_y_[e] = st.j[0];
        field.d_yy_[e] = st.h[0];
        for (std::size_t a = 0; a < d; ++a) {
            field.d_x_[e * d + a] = st.j[a + 1];
            field.d_xy_[e * d + a] = st.h[a + 1];
            for (std::size_t b = 0; b < d; ++b) {
                field.d_xx_[e * d * d + a * d + b] = st.h[(a + 1) * m + b + 1];
            }
        }
    };

    for (std::size_t j = 0; j < field.x_count_; ++j) {
        const Point x = field.x_sample(j);
        for (std::size_t k = 0; k < ny; ++k) {
            s.eta = field.y_sample(k);
            std::fill(s.j.begin(), s.j.end(), 0.0);
            std::fill(s.h.begin(), s.h.end(), 0.0);
            s.j[0] = 1.0;
            store(n, j, k, s);
            for (std::size_t i = n; i-- > 0;) {
                if (!g.is_zero()) {
                    const auto db = bundle.b.row(i);
                    jets.eval(bundle.grid.node(i + 1), x, s.eta, jet1);
                    flow_increment(jet1, s, db, v1, dj1, dh1);
                    pred.eta = s.eta + v1;
                    for (std::size_t a = 0; a < m; ++a) pred.j[a] = s.j[a] + dj1[a];
                    for (std::size_t a = 0; a < m * m; ++a) pred.h[a] = s.h[a] + dh1[a];
                    jets.eval(bundle.grid.node(i), x, pred.eta, jet2);
                    flow_increment(jet2, pred, db, v2, dj2, dh2);
                    s.eta += 0.5 * (v1 + v2);
                    for (std::size_t a = 0; a < m; ++a) s.j[a] += 0.5 * (dj1[a] + dj2[a]);
                    for (std::size_t a = 0; a < m * m; ++a) s.h[a] += 0.5 * (dh1[a] + dh2[a]);
                    if (!std::isfinite(s.eta)) {
                        throw NumericalError("flow diverged at node " + std::to_string(i));
                    }
                }
                store(i, j, k, s);
            }
        }
    }
    return field;
}

InverseTable invert_flow(const FlowField& field, std::span<const double> v_samples) {
    if (!(field.min_d_y() > 0.0)) {
        throw NumericalError("flow is not increasing in y on the tabulated range");
    }
    InverseTable table;
    table.v_samples.assign(v_samples.begin(), v_samples.end());
    const std::size_t n = field.grid().n_steps();
    const std::size_t total = (n + 1) * field.x_count() * v_samples.size();
    table.values.assign(total, 0.0);
    table.out_of_range.assign(total, 0);
    std::size_t e = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j < field.x_count(); ++j) {
            const Point x = field.x_sample(j);
            for (double v : v_samples) {
                try {
                    table.values[e] = field.inverse(field.grid().node(i), x, v);
                } catch (const NumericalError&) {
                    table.values[e] = std::numeric_limits<double>::quiet_NaN();
                    table.out_of_range[e] = 1;
                }
                ++e;
            }
        }
    }
    return table;
}

CoefficientSet transform_coefficients(const CoefficientSet& coeffs, const FlowField& field,
                                      const Domain& domain, const SdeSpec& sde) {
    const std::size_t d = coeffs.dim;
    if (field.x_dim() != d || sde.dim != d || domain.dimension() != d) {
        throw ValidationError("flow, SDE, domain and coefficients disagree on the dimension");
    }
    if (coeffs.noise.depends_on_z) throw ValidationError("flow transform needs g independent of z");
    auto flow = std::make_shared<const FlowField>(field);
    const auto g = coeffs.noise;
    const auto f = coeffs.driver;
    const auto phi = coeffs.boundary;
    const auto h = coeffs.obstacle;
    const SdeSpec sde_copy = sde;
    const Domain dom = domain;

    CoefficientSet out = coeffs;
    out.noise = NoiseCoefficient::zero(coeffs.noise.dim);
    out.driver = [flow, g, f, sde_copy, d](double t, std::span<const double> x, double y,
                                           std::span<const double> z) {
        const FlowSample s = flow->sample(t, x, y);
        std::vector<double> sigma(d * d), drift(d);
        sde_copy.diffusion(x, sigma);
        sde_copy.drift(x, drift);
        std::vector<double> z_arg(d);
        double cross = 0.0, z2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double sx = 0.0, sxy = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                sx += sigma[i * d + k] * s.d_x[i];
                sxy += sigma[i * d + k] * s.d_xy[i];
            }
            z_arg[k] = sx + s.d_y * z[k];
            cross += sxy * z[k];
            z2 += z[k] * z[k];
        }
        double lx = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            lx += drift[i] * s.d_x[i];
            for (std::size_t j = 0; j < d; ++j) {
                double a = 0.0;
                for (std::size_t k = 0; k < d; ++k) a += sigma[i * d + k] * sigma[j * d + k];
                lx += 0.5 * a * s.d_xx[i * d + j];
            }
        }
        double gdg = 0.0;
        if (!g.is_zero()) {
            std::vector<double> gp(g.dim), gm(g.dim), g0(g.dim);
            const double hy = 1e-5 * std::max(1.0, std::abs(s.eta));
            g.value(t, x, s.eta, {}, g0);
            g.value(t, x, s.eta + hy, {}, gp);
            g.value(t, x, s.eta - hy, {}, gm);
            for (std::size_t c = 0; c < g.dim; ++c) gdg += g0[c] * (gp[c] - gm[c]) / (2.0 * hy);
        }
        const double fv = f ? f(t, x, s.eta, z_arg) : 0.0;
        return (fv - 0.5 * gdg + lx + cross + 0.5 * s.d_yy * z2) / s.d_y;
    };
    out.boundary = [flow, phi, dom](double t, std::span<const double> x, double y) {
        const FlowSample s = flow->sample(t, x, y);
        const Point n = unit_gradient(dom, x);
        double v = phi ? phi(t, x, s.eta) : 0.0;
        for (std::size_t a = 0; a < n.size(); ++a) v += s.d_x[a] * n[a];
        return v / s.d_y;
    };
    if (h) {
        out.obstacle = [flow, h](double t, std::span<const double> x) {
            return flow->inverse(t, x, h(t, x));
        };
    }
    return out;
}

double conversion_residual(const NoiseCoefficient& g, const PathBundle& bundle,
                           std::span<const double> x, double y0) {
    if (g.is_zero()) return 0.0;
    if (g.dim != 1 || bundle.b.dim != 1) {
        throw ValidationError("conversion residual is defined for scalar backward noise");
    }
    if (g.depends_on_z) throw ValidationError("conversion residual needs g independent of z");
    const TimeGrid& grid = bundle.grid;
    const std::size_t n = grid.n_steps();
    std::vector<double> states(n + 1);
    std::vector<double> buf(1);
    const auto gv = [&](double t, double y) {
        g.value(t, x, y, {}, buf);
        return buf[0];
    };
    states[n] = y0;
    for (std::size_t i = n; i-- > 0;) {
        const double db = bundle.b.row(i)[0];
        const double g1 = gv(grid.node(i + 1), states[i + 1]);
        const double pred = states[i + 1] + g1 * db;
        states[i] = states[i + 1] + 0.5 * (g1 + gv(grid.node(i), pred)) * db;
    }
    const StateIntegrand integrand = [&](double t, double y, std::span<double> out) {
        g.value(t, x, y, {}, out);
    };
    const double strat = backward_stratonovich_integral(integrand, states, bundle, 0, n);
    const auto right = RightNodeSamples::from_nodes(n, 1, [&](std::size_t node, std::span<double> out) {
        g.value(grid.node(node), x, states[node], {}, out);
    });
    const double ito = backward_ito_integral(right, bundle, 0, n);
    double correction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.node(i + 1);
        const double y = states[i + 1];
        const double hy = 1e-5 * std::max(1.0, std::abs(y));
        correction += gv(t, y) * (gv(t, y + hy) - gv(t, y - hy)) / (2.0 * hy) * grid.dt();
    }
    return std::abs(strat - ito - 0.5 * correction);
}

void write_flow_csv(std::ostream& os, const FlowField& field) {
    os << "t";
    for (std::size_t a = 0; a < field.x_dim(); ++a) fmt::print(os, ",x_{}", a + 1);
    os << ",y,eta,d_eta_dy\n";
    for (std::size_t i = 0; i <= field.grid().n_steps(); ++i) {
        for (std::size_t j = 0; j < field.x_count(); ++j) {
            const Point x = field.x_sample(j);
            for (std::size_t k = 0; k < field.y_count(); ++k) {
                fmt::print(os, "{:.17g}", field.grid().node(i));
                for (double v : x) fmt::print(os, ",{:.17g}", v);
                fmt::print(os, ",{:.17g},{:.17g},{:.17g}\n", field.y_sample(k), field.eta_at(i, j, k),
                           field.d_y_at(i, j, k));
            }
        }
    }
}

}  // namespace rbdsde
