// Acceptance battery. With no arguments every criterion runs; otherwise only
// the listed ones. One line per criterion: "criterion K: PASS|FAIL ...".
// The exit status is nonzero when any selected criterion fails.

#include "oracles.hpp"

#include "rbdsde/bdsde_solver.hpp"
#include "rbdsde/doss_sussman.hpp"
#include "rbdsde/field_lab.hpp"
#include "rbdsde/fixpoint.hpp"
#include "rbdsde/reflected_sde.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

using namespace rbdsde;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double time_limit;  // seconds
    std::function<Outcome()> body;
};

double b_tail(const PathBundle& b, std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < b.grid.n_steps(); ++i) s += b.b.row(i)[0];
    return s;
}

struct Run {
    PathEnsemble noise;
    ReflectedEnsemble paths;
};

Run simulate(const Domain& d, const SdeSpec& s, const TimeGrid& g, std::size_t n, double x0,
             std::uint64_t seed, std::uint64_t stream = 0, std::size_t b_dim = 1) {
    PathEnsemble e = sample_ensemble(g, 1, b_dim, n, seed, stream);
    ReflectedEnsemble r = simulate_ensemble(d, s, {g.t_start(), {x0}}, e);
    return {std::move(e), std::move(r)};
}

// 1. Flow of g(y) = y against y exp(B_T - B_t), and inversion round trip.
Outcome flow_exactness() {
    const TimeGrid g(0.0, 1.0, 4096);
    const PathBundle b = sample_bundle(g, 1, 1, 2024, 0);
    const std::vector<double> x{0.0};
    const FlowField f = solve_flow(NoiseCoefficient::linear(1.0), b, FlowSamples::at_point(x, -3.0, 3.0, 61));
    double rel = 0.0, roundtrip = 0.0;
    for (std::size_t i = 0; i <= g.n_steps(); ++i) {
        const double e = std::exp(b_tail(b, i));
        for (std::size_t k = 0; k < f.y_count(); ++k) {
            const double y = f.y_sample(k);
            if (y != 0.0) rel = std::max(rel, std::abs(f.eta_at(i, 0, k) - y * e) / std::abs(y * e));
            roundtrip = std::max(roundtrip, std::abs(f.inverse(g.node(i), x, f.eta_at(i, 0, k)) - y));
        }
    }
    return {rel <= 1e-3 && roundtrip <= 1e-8,
            fmt::format("max relative error {:.3g} (<= 1e-3), round trip {:.3g} (<= 1e-8)", rel, roundtrip)};
}

// 2. Ito-Stratonovich conversion residual across a ladder of step sizes.
Outcome conversion_order() {
    const std::vector<std::size_t> ladder{256, 512, 1024, 2048, 4096};
    const TimeGrid fine(0.0, 1.0, 4096);
    const std::vector<double> x{0.0};
    const std::size_t streams = 32;
    std::vector<double> res(ladder.size(), 0.0);
    for (std::uint64_t s = 0; s < streams; ++s) {
        const PathBundle b = sample_bundle(fine, 1, 1, 77, s);
        for (std::size_t q = 0; q < ladder.size(); ++q) {
            res[q] += conversion_residual(NoiseCoefficient::linear(1.0), coarsen(b, 4096 / ladder[q]), x, 1.0) /
                      static_cast<double>(streams);
        }
    }
    std::vector<double> steps(ladder.begin(), ladder.end());
    const double order = -oracle::loglog_slope(steps, res);
    bool halves = true;
    for (std::size_t q = 1; q < res.size(); ++q) halves = halves && res[q] <= 0.5 * res[q - 1];
    std::string ladder_text;
    for (double r : res) ladder_text += fmt::format(" {:.3g}", r);
    return {halves && order >= 0.9,
            fmt::format("fitted order {:.3f} (>= 0.9), halving at every doubling: {}; mean residuals{}", order,
                        halves ? "yes" : "no", ladder_text)};
}

// 3. Linear driver against the Feynman-Kac closed form e^{aT}(x0^2 + T).
Outcome feynman_kac() {
    const double a = 0.5, T = 0.5;
    CoefficientSet c;
    c.terminal = [](std::span<const double> x) { return x[0] * x[0]; };
    c.driver = [a](double, std::span<const double>, double y, std::span<const double>) { return a * y; };
    const TimeGrid g(0.0, T, 100);
    const Run r = simulate(Domain::ball({0.0}, 10.0), SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0), g, 20000, 0.0, 7);
    const BackwardSolution sol = solve_generalized(c, r.paths, r.noise);
    const double exact = std::exp(a * T) * T;
    const double err = std::abs(sol.start_value() - exact);
    return {err <= 2e-2, fmt::format("Y0 {:.5f} vs {:.5f}: error {:.3g} (<= 2e-2), s.e. {:.2g}", sol.start_value(),
                                     exact, err, sol.start_standard_error)};
}

CoefficientSet american_put(double strike, double rate) {
    CoefficientSet c;
    c.terminal = [strike](std::span<const double> x) { return std::max(strike - x[0], 0.0); };
    c.obstacle = [strike](double, std::span<const double> x) { return std::max(strike - x[0], 0.0); };
    c.driver = [rate](double, std::span<const double>, double y, std::span<const double>) { return -rate * y; };
    c.constants.c = rate;
    return c;
}

const Domain kPutDomain = Domain::ball({1.0}, 10.0);
const SdeSpec kPutSde = SdeSpec::affine(1, {0.0}, 0.06, 0.0, 0.2);

// 4. Reflected equation with obstacle against a binomial American put.
Outcome american_put_tree() {
    const TimeGrid g(0.0, 1.0, 100);
    const Run r = simulate(kPutDomain, kPutSde, g, 50000, 0.9, 5);
    const BackwardSolution sol = solve_reflected_direct(american_put(1.0, 0.06), r.paths, r.noise);
    const double tree = oracle::binomial_american_put(0.9, 1.0, 0.06, 0.2, 1.0, 2000);
    const double err = std::abs(sol.start_value() - tree);
    return {err <= 1e-2, fmt::format("Y0 {:.5f} vs tree {:.5f}: error {:.3g} (<= 1e-2)", sol.start_value(), tree, err)};
}

// 5. Penalization ladder.
Outcome penalization_ladder() {
    const TimeGrid g(0.0, 1.0, 100);
    const std::size_t n_paths = 20000;
    const Run r = simulate(kPutDomain, kPutSde, g, n_paths, 0.9, 5);
    const CoefficientSet c = american_put(1.0, 0.06);
    const BackwardSolution direct = solve_reflected_direct(c, r.paths, r.noise);
    std::vector<double> means, ses, sups;
    double skorokhod = 0.0;
    for (double n : {4.0, 16.0, 64.0, 256.0}) {
        const BackwardSolution sol = solve_penalized(c, n, r.paths, r.noise);
        means.push_back(sol.start_value());
        ses.push_back(sol.start_standard_error);
        double sup = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            for (std::size_t i = 0; i <= g.n_steps(); ++i) sup = std::max(sup, std::abs(sol.y(p, i) - direct.y(p, i)));
        }
        sups.push_back(sup);
        skorokhod = skorokhod_residual(sol, c, r.paths);
    }
    bool monotone = true, shrinking = true;
    for (std::size_t k = 1; k < means.size(); ++k) {
        monotone = monotone && means[k] >= means[k - 1] - 3.0 * std::max(ses[k], ses[k - 1]);
        shrinking = shrinking && sups[k] < sups[k - 1];
    }
    const double limit = 5.0 * scheme_tolerance(g, n_paths);
    return {monotone && shrinking && skorokhod <= limit,
            fmt::format("mean Y0 {:.5f} {:.5f} {:.5f} {:.5f} (nondecreasing: {}), sup gap {:.3g} {:.3g} {:.3g} {:.3g} "
                        "(decreasing: {}), Skorokhod at n=256 {:.3g} (<= {:.3g})",
                        means[0], means[1], means[2], means[3], monotone ? "yes" : "no", sups[0], sups[1], sups[2],
                        sups[3], shrinking ? "yes" : "no", skorokhod, limit)};
}

// 6. Comparison battery: five ordered pairs, three backward paths each.
Outcome comparison_battery() {
    CoefficientSet base;
    base.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); };
    base.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y; };
    base.boundary = [](double, std::span<const double>, double y) { return -y; };
    base.noise = NoiseCoefficient::linear(0.2);
    std::vector<std::pair<const char*, CoefficientSet>> uppers;
    {
        CoefficientSet c = base;
        c.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5) + 0.5; };
        uppers.emplace_back("terminal", c);
    }
    {
        CoefficientSet c = base;
        c.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5) + 0.5 * x[0] * x[0]; };
        uppers.emplace_back("terminal_quadratic", c);
    }
    {
        CoefficientSet c = base;
        c.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y + 0.5; };
        uppers.emplace_back("driver", c);
    }
    {
        CoefficientSet c = base;
        c.driver = [](double, std::span<const double>, double y, std::span<const double> z) {
            return -0.5 * y + 0.5 * std::abs(z[0]);
        };
        uppers.emplace_back("driver_z", c);
    }
    {
        CoefficientSet c = base;
        c.boundary = [](double, std::span<const double>, double y) { return 0.5 - y; };
        uppers.emplace_back("boundary", c);
    }
    const TimeGrid g(0.0, 1.0, 20);
    std::size_t violations = 0;
    double worst = -1e300;
    for (std::uint64_t seed : {101u, 202u, 303u}) {
        const Run r = simulate(Domain::ball({0.5}, 0.5), SdeSpec::affine(1, {0.0}, 0.0, 0.5, 0.0), g, 4000, 0.5, seed);
        for (const auto& [name, upper] : uppers) {
            const ViolationReport v = comparison_check(base, upper, r.paths, r.noise);
            violations += v.total;
            worst = std::max(worst, v.worst);
        }
    }
    return {violations == 0,
            fmt::format("{} violations beyond 3x scheme tolerance over 15 runs; largest Y_lower - Y_upper {:.3g}",
                        violations, worst)};
}

// 7. Fixed-point contraction for z-dependent g.
Outcome picard_contraction() {
    CoefficientSet c;
    c.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); };
    c.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y; };
    c.boundary = [](double, std::span<const double>, double y) { return -y; };
    c.noise = NoiseCoefficient::linear(0.3, 0.25);
    c.constants.alpha = 0.25;
    c.constants.c = 0.5;
    c.constants.beta = -1.0;
    const TimeGrid g(0.0, 1.0, 20);
    const Run r = simulate(Domain::ball({0.5}, 0.5), SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0), g, 5000, 0.5, 13);
    const NormWeights w = NormWeights::from_constants(c.constants, 0.625);
    const PicardResult res = picard_solve(c, r.paths, r.noise, w, 1e-4, 8);
    const double bound = 0.25 / 0.625 + 0.1;
    double worst = 0.0;
    for (double q : res.report.contraction_ratios) worst = std::max(worst, q);
    const bool ok = res.report.converged && res.report.iterations <= 8 && worst <= bound &&
                    res.report.distances.back() < 1e-4;
    return {ok, fmt::format("{} iterations, final weighted distance {:.3g} (< 1e-4), largest ratio {:.3g} (<= {:.3g})",
                            res.report.iterations, res.report.distances.back(), worst, bound)};
}

// 8. Local time: deterministic wall hit, and reflected Brownian motion
// against a fine-grid self-reference.
Outcome local_time() {
    const Domain d = Domain::ball({0.5}, 0.5);
    const TimeGrid g(0.0, 1.0, 1000);
    const ReflectedPath det = simulate_reflected(d, SdeSpec::affine(1, {-5.0}, 0.0, 0.0, 0.0), {0.0, {0.5}},
                                                 sample_bundle(g, 1, 1, 0, 0));
    const double det_err = std::abs(det.a_values.back() - 4.5);
    const bool det_ok = det_err <= 5.0 * g.dt();

    const SdeSpec bm = SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0);
    // Path by path, so the fine reference never holds the whole ensemble.
    auto mean_a = [&](std::size_t steps, std::uint64_t seed) {
        const TimeGrid tg(0.0, 1.0, steps);
        const std::size_t n_paths = 10000;
        double m = 0.0, m2 = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            const double a = simulate_reflected(d, bm, {0.0, {0.5}}, sample_bundle(tg, 1, 1, seed, p)).a_values.back();
            m += a;
            m2 += a * a;
        }
        const double n = static_cast<double>(n_paths);
        m /= n;
        return std::pair{m, std::sqrt((m2 / n - m * m) / n)};
    };
    const auto [coarse, se_c] = mean_a(4096, 41);
    const auto [fine, se_f] = mean_a(65536, 42);
    const double band = 3.0 * std::sqrt(se_c * se_c + se_f * se_f);
    const bool bm_ok = std::abs(coarse - fine) <= band;
    return {det_ok && bm_ok,
            fmt::format("deterministic A_T {:.5f} vs 4.5 (error {:.3g} <= {:.3g}); reflected BM E[A_T] {:.4f} at N=4096 "
                        "vs {:.4f} at N=65536 (|diff| {:.3g} <= {:.3g})",
                        det.a_values.back(), det_err, 5.0 * g.dt(), coarse, fine, std::abs(coarse - fine), band)};
}

// 9. Moment scaling under synchronous coupling.
Outcome moment_scaling() {
    const Domain d = Domain::ball({0.0}, 1.0);
    const SdeSpec s = SdeSpec::affine(1, {0.0}, -0.5, 0.3, 0.2);
    const TimeGrid g(0.0, 1.0, 200);
    std::vector<ScalingPair> pairs;
    for (double gap : {0.25, 0.125, 0.0625, 0.03125, 0.015625}) pairs.push_back({{0.0, {0.0}}, {0.0, {gap}}});
    const ScalingReport rep = moment_scaling_report(d, s, g, pairs, 5.0, 10000, 9);
    const double slope = rep.x_slope_in_space.value_or(0.0);
    return {slope >= 4.0 && slope <= 6.0, fmt::format("fitted slope {:.4f} (in [4, 6])", slope)};
}

// 10. Doss consistency at field level for constant g.
Outcome doss_consistency_check() {
    FieldProblem p;
    p.domain = Domain::ball({0.0}, 1.0);
    p.sde = SdeSpec::affine(1, {0.0}, 0.0, 0.5, 0.0);
    p.coeffs.terminal = [](std::span<const double> x) { return std::cos(x[0]); };
    p.coeffs.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.5 * y; };
    p.coeffs.noise = NoiseCoefficient::constant({0.5});
    p.coeffs.constants.c = 0.5;
    p.grid = TimeGrid(0.0, 1.0, 20);
    p.n_paths = 4000;
    p.seed = 21;
    p.options.picard_pass = true;
    const FieldGrid grid = FieldGrid::uniform(p.grid, p.domain, 11, 11);
    const std::vector<std::uint64_t> streams{0, 1, 2};
    const DossConsistencyReport r = doss_consistency(p, grid, FieldScheme::generalized(), streams);
    double worst = 0.0;
    for (double e : r.sup_errors) worst = std::max(worst, e);
    return {r.passed, fmt::format("largest sup error {:.3g} over 3 backward paths (<= {:.3g})", worst, r.tolerance)};
}

// 11. Deterministic reduction residuals.
Outcome deterministic_residuals() {
    FieldProblem heat;
    heat.domain = Domain::ball({0.0}, 10.0);
    heat.sde = SdeSpec::affine(1, {0.0}, 0.0, std::sqrt(2.0), 0.0);
    heat.coeffs.terminal = [](std::span<const double> x) { return std::cos(x[0]); };
    heat.grid = TimeGrid(0.0, 1.0, 20);
    heat.n_paths = 80000;
    heat.seed = 2;
    const std::vector<double> lo{-1.0}, hi{1.0};
    const SolutionField hf = build_field(heat, FieldGrid::uniform(heat.grid, lo, hi, 21, 21), FieldScheme::generalized());
    const ResidualReport hr = deterministic_pde_residual(hf, heat);

    FieldProblem neu;
    neu.domain = Domain::ball({0.5}, 0.5);
    neu.sde = SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0);
    neu.coeffs.terminal = [](std::span<const double> x) { return (x[0] - 0.5) * (x[0] - 0.5); };
    neu.coeffs.boundary = [](double, std::span<const double>, double y) { return 1.25 - y; };
    neu.grid = TimeGrid(0.0, 1.0, 320);
    neu.n_paths = 8000;
    neu.seed = 4;
    const SolutionField nf = build_field(neu, FieldGrid::uniform(neu.grid, neu.domain, 21, 21), FieldScheme::generalized());
    const ResidualReport nr = deterministic_pde_residual(nf, neu);
    return {hr.interior_sup <= 5e-2 && nr.boundary_sup <= 1e-1,
            fmt::format("heat interior sup {:.3g} (<= 5e-2); Neumann boundary sup {:.3g} (<= 1e-1)", hr.interior_sup,
                        nr.boundary_sup)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "flow exactness", 10, flow_exactness},
        {2, "Ito-Stratonovich conversion order", 30, conversion_order},
        {3, "Feynman-Kac oracle", 60, feynman_kac},
        {4, "American put oracle", 180, american_put_tree},
        {5, "penalization ladder", 300, penalization_ladder},
        {6, "comparison battery", 180, comparison_battery},
        {7, "fixed-point contraction", 300, picard_contraction},
        {8, "reflected SDE local time", 120, local_time},
        {9, "moment scaling", 180, moment_scaling},
        {10, "flow consistency of the field", 600, doss_consistency_check},
        {11, "deterministic reduction residuals", 300, deterministic_residuals},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    bool all_pass = true;
    for (const Criterion& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = o.pass && in_time;
        all_pass = all_pass && pass;
        fmt::print("criterion {}: {} {}; {}; runtime {:.1f} s (< {:.0f} s)\n", c.id, pass ? "PASS" : "FAIL", c.title,
                   o.detail, secs, c.time_limit);
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
