#include "commands.hpp"

#include "manifest.hpp"
#include "scenario.hpp"

#include "rbdsde/bdsde_solver.hpp"
#include "rbdsde/doss_sussman.hpp"
#include "rbdsde/errors.hpp"
#include "rbdsde/field_lab.hpp"
#include "rbdsde/fixpoint.hpp"
#include "rbdsde/reflected_sde.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

namespace rbdsde::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::optional<std::string> out;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> b_scenarios;
    std::vector<double> levels;
};

class Run {
public:
    Run(std::string command, const Flags& flags, Scenario scenario)
        : command_(std::move(command)), flags_(flags), sc_(std::move(scenario)) {
        if (flags.out) {
            dir_ = *flags.out;
        } else if (const char* env = std::getenv("RBDSDE_OUT"); env != nullptr && *env != '\0') {
            dir_ = env;
        } else if (sc_.output) {
            dir_ = *sc_.output;
        } else {
            dir_ = "rbdsde_out";
        }
        fs::create_directories(dir_);
    }

    const Scenario& scenario() const { return sc_; }
    std::size_t workers() const { return flags_.workers; }
    void note_stream(std::uint64_t s) { streams_.push_back(s); }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path path = dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ValidationError("cannot write " + path.string());
        body(os);
        os.close();
        if (!os) throw ValidationError("failed writing " + path.string());
        files_.push_back(name);
    }

    void finish(double wall_seconds) {
        ManifestInput m;
        m.subcommand = command_;
        m.scenario_path = flags_.scenario;
        m.scenario_name = sc_.name;
        m.config = sc_.config;
        m.seed = sc_.seed;
        m.b_streams = streams_;
        m.workers = flags_.workers;
        m.wall_seconds = wall_seconds;
        m.directory = dir_;
        m.files = files_;
        write_manifest(m);
        fmt::print("wrote {} file(s) and manifest.json to {}\n", files_.size(), dir_.string());
    }

private:
    std::string command_;
    Flags flags_;
    Scenario sc_;
    fs::path dir_;
    std::vector<std::string> files_;
    std::vector<std::uint64_t> streams_;
};

struct Simulation {
    PathEnsemble noise;
    ReflectedEnsemble paths;
};

std::size_t backward_dim(const Scenario& s) {
    return s.coeffs.noise.is_zero() ? 1 : s.coeffs.noise.dim;
}

Simulation simulate(const Scenario& s, std::uint64_t stream, std::size_t n_paths = 0) {
    PathEnsemble noise = sample_ensemble(s.grid, s.coeffs.dim, backward_dim(s),
                                         n_paths == 0 ? s.n_paths : n_paths, s.seed, stream);
    ReflectedEnsemble paths = simulate_ensemble(s.domain, s.sde, s.start, noise);
    return {std::move(noise), std::move(paths)};
}

BackwardSolution solve_scenario(const Scenario& s, const Simulation& sim) {
    if (s.coeffs.noise.depends_on_z) {
        const auto w = NormWeights::from_constants(s.coeffs.constants, s.picard.alpha_prime);
        return picard_solve(s.coeffs, sim.paths, sim.noise, w, s.picard.tolerance,
                            s.picard.max_iterations, s.options)
            .solution;
    }
    switch (s.scheme) {
        case Scheme::direct: return solve_reflected_direct(s.coeffs, sim.paths, sim.noise, s.options);
        case Scheme::penalized:
            return solve_penalized(s.coeffs, s.penalty, sim.paths, sim.noise, s.options);
        case Scheme::generalized: break;
    }
    return solve_generalized(s.coeffs, sim.paths, sim.noise, s.options);
}

FieldProblem field_problem(const Scenario& s) {
    FieldProblem p;
    p.domain = s.domain;
    p.sde = s.sde;
    p.coeffs = s.coeffs;
    p.grid = s.grid;
    p.n_paths = s.n_paths;
    p.seed = s.seed;
    p.b_dim = backward_dim(s);
    p.options = s.options;
    return p;
}

FieldGrid field_grid(const Scenario& s) {
    if (!s.field.x_min) return FieldGrid::uniform(s.grid, s.domain, s.field.t_nodes, s.field.x_points);
    const std::vector<double> lo(s.coeffs.dim, *s.field.x_min), hi(s.coeffs.dim, *s.field.x_max);
    return FieldGrid::uniform(s.grid, lo, hi, s.field.t_nodes, s.field.x_points);
}

FieldScheme field_scheme(const Scenario& s) { return {s.scheme, s.penalty}; }

void cmd_simulate_x(Run& run) {
    const Scenario& s = run.scenario();
    run.note_stream(0);
    const Simulation sim = simulate(s, 0);
    const ReflectedPath path = simulate_reflected(s.domain, s.sde, s.start, sim.noise.bundle(0));
    run.write("path.csv", [&](std::ostream& os) { write_path_csv(os, path); });
    const std::size_t n = s.grid.n_steps();
    const std::size_t d = s.coeffs.dim;
    const double np = static_cast<double>(sim.paths.n_paths);
    run.write("local_time.csv", [&](std::ostream& os) {
        os << "step,time";
        for (std::size_t k = 0; k < d; ++k) fmt::print(os, ",mean_x_{}", k + 1);
        os << ",mean_a,sd_a\n";
        for (std::size_t i = 0; i <= n; ++i) {
            std::vector<double> mx(d, 0.0);
            double ma = 0.0, sa = 0.0;
            for (std::size_t p = 0; p < sim.paths.n_paths; ++p) {
                const auto x = sim.paths.x(p, i);
                for (std::size_t k = 0; k < d; ++k) mx[k] += x[k];
                ma += sim.paths.a(p, i);
            }
            ma /= np;
            for (std::size_t p = 0; p < sim.paths.n_paths; ++p) {
                sa += (sim.paths.a(p, i) - ma) * (sim.paths.a(p, i) - ma);
            }
            fmt::print(os, "{},{:.17g}", i, s.grid.node(i));
            for (double v : mx) fmt::print(os, ",{:.17g}", v / np);
            fmt::print(os, ",{:.17g},{:.17g}\n", ma, std::sqrt(sa / np));
        }
    });
    double mean_a = 0.0, var_a = 0.0;
    for (std::size_t p = 0; p < sim.paths.n_paths; ++p) mean_a += sim.paths.a(p, n);
    mean_a /= np;
    for (std::size_t p = 0; p < sim.paths.n_paths; ++p) {
        var_a += (sim.paths.a(p, n) - mean_a) * (sim.paths.a(p, n) - mean_a);
    }
    fmt::print("E[A_T] = {:.6g} +- {:.2g} ({} paths, {} steps)\n", mean_a,
               std::sqrt(var_a / (np - 1.0) / np), sim.paths.n_paths, n);

    if (s.config.contains("scaling")) {
        std::vector<ScalingPair> pairs;
        for (double gap : s.scaling.gaps) {
            StartPoint other = s.start;
            other.x[0] += gap;
            if (!in_closure(s.domain, other.x)) {
                throw ValidationError(fmt::format("scaling gap {} moves the start outside the closure", gap));
            }
            pairs.push_back({s.start, other});
        }
        const ScalingReport rep = moment_scaling_report(s.domain, s.sde, s.grid, pairs,
                                                        s.scaling.exponent, s.n_paths, s.seed);
        run.write("scaling.csv", [&](std::ostream& os) {
            os << "space_gap,x_moment,a_moment\n";
            for (const auto& r : rep.rows) {
                fmt::print(os, "{:.17g},{:.17g},{:.17g}\n", r.space_gap, r.x_moment, r.a_moment);
            }
        });
        if (rep.x_slope_in_space) fmt::print("moment slope (X) = {:.4f}\n", *rep.x_slope_in_space);
        if (rep.a_slope_in_space) fmt::print("moment slope (A) = {:.4f}\n", *rep.a_slope_in_space);
    }
}

void cmd_solve(Run& run) {
    const Scenario& s = run.scenario();
    run.note_stream(0);
    const Simulation sim = simulate(s, 0);
    const BackwardSolution sol = solve_scenario(s, sim);
    run.write("solution.csv", [&](std::ostream& os) { write_solution_csv(os, sol, s.coeffs, sim.paths); });
    const double tol = scheme_tolerance(s.grid, s.n_paths);
    const double sk = s.coeffs.has_obstacle() ? skorokhod_residual(sol, s.coeffs, sim.paths) : 0.0;
    run.write("summary.csv", [&](std::ostream& os) {
        os << "scheme,penalty,start_time,y0,standard_error,scheme_tolerance,skorokhod\n";
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", to_string(sol.scheme),
                   sol.penalty, s.start.t, sol.start_value(), sol.start_standard_error, tol, sk);
    });
    fmt::print("Y at t={} : {:.6f} +- {:.2g} (scheme {}, tolerance {:.3g})\n", s.start.t,
               sol.start_value(), sol.start_standard_error, to_string(sol.scheme), tol);
}

void cmd_penalize_sweep(Run& run) {
    const Scenario& s = run.scenario();
    if (!s.coeffs.has_obstacle()) throw ValidationError("penalize-sweep needs an obstacle");
    if (s.coeffs.noise.depends_on_z) throw ValidationError("penalize-sweep needs g independent of z");
    run.note_stream(0);
    const Simulation sim = simulate(s, 0);
    const BackwardSolution direct = solve_reflected_direct(s.coeffs, sim.paths, sim.noise, s.options);
    const std::size_t n = s.grid.n_steps();
    struct Row {
        double level;
        BackwardSolution sol;
        double sup_diff;
        double skorokhod;
    };
    std::vector<Row> rows;
    for (double level : s.penalty_levels) {
        BackwardSolution sol = solve_penalized(s.coeffs, level, sim.paths, sim.noise, s.options);
        double sup = 0.0;
        for (std::size_t p = 0; p < sol.n_paths; ++p) {
            for (std::size_t i = sol.start_step; i <= n; ++i) {
                sup = std::max(sup, std::abs(sol.y(p, i) - direct.y(p, i)));
            }
        }
        const double sk = skorokhod_residual(sol, s.coeffs, sim.paths);
        rows.push_back({level, std::move(sol), sup, sk});
    }
    run.write("penalize_sweep.csv", [&](std::ostream& os) {
        os << "scheme,n,y0,standard_error,sup_diff_direct,skorokhod,implicit\n";
        for (const auto& r : rows) {
            fmt::print(os, "penalized,{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.level,
                       r.sol.start_value(), r.sol.start_standard_error, r.sup_diff, r.skorokhod,
                       r.sol.implicit_penalty_used ? 1 : 0);
        }
        fmt::print(os, "direct,,{:.17g},{:.17g},0,{:.17g},0\n", direct.start_value(),
                   direct.start_standard_error, skorokhod_residual(direct, s.coeffs, sim.paths));
    });
    fmt::print("{:>10} {:>12} {:>10} {:>14} {:>12}\n", "n", "Y0", "s.e.", "sup|Yn-Yd|", "skorokhod");
    for (const auto& r : rows) {
        fmt::print("{:>10} {:>12.6f} {:>10.2g} {:>14.6g} {:>12.4g}\n", r.level, r.sol.start_value(),
                   r.sol.start_standard_error, r.sup_diff, r.skorokhod);
    }
    fmt::print("{:>10} {:>12.6f} {:>10.2g}\n", "direct", direct.start_value(),
               direct.start_standard_error);
}

void cmd_picard(Run& run) {
    const Scenario& s = run.scenario();
    run.note_stream(0);
    const Simulation sim = simulate(s, 0);
    const auto weights = NormWeights::from_constants(s.coeffs.constants, s.picard.alpha_prime);
    const PicardResult res = picard_solve(s.coeffs, sim.paths, sim.noise, weights, s.picard.tolerance,
                                          s.picard.max_iterations, s.options);
    run.write("picard.csv", [&](std::ostream& os) { write_picard_csv(os, res.report); });
    run.write("solution.csv",
              [&](std::ostream& os) { write_solution_csv(os, res.solution, s.coeffs, sim.paths); });
    print_picard_summary(std::cout, res.report);
}

void cmd_compare(Run& run) {
    const Scenario& s = run.scenario();
    const CoefficientSet upper = shifted_coefficients(s.coeffs, s.compare.shift, s.compare.amount);
    std::vector<std::pair<std::uint64_t, ViolationReport>> reports;
    for (std::uint64_t stream = 0; stream < s.n_b_scenarios; ++stream) {
        run.note_stream(stream);
        const Simulation sim = simulate(s, stream);
        reports.emplace_back(stream, comparison_check(s.coeffs, upper, sim.paths, sim.noise, s.options));
    }
    run.write("compare.csv", [&](std::ostream& os) {
        os << "b_stream,shift,amount,violations,worst,threshold\n";
        for (const auto& [stream, r] : reports) {
            fmt::print(os, "{},{},{:.17g},{},{:.17g},{:.17g}\n", stream, s.compare.shift,
                       s.compare.amount, r.total, r.worst, r.threshold);
        }
    });
    for (const auto& [stream, r] : reports) {
        fmt::print("stream {}: ", stream);
        print_violation_summary(std::cout, r);
    }
}

void cmd_doss_check(Run& run) {
    const Scenario& s = run.scenario();
    const NoiseCoefficient& g = s.coeffs.noise;
    if (g.is_zero()) throw ValidationError("doss-check needs a nonzero noise coefficient g");
    if (g.depends_on_z) throw ValidationError("doss-check needs g independent of z");
    const std::size_t d = s.coeffs.dim;
    const std::size_t l = backward_dim(s);
    run.note_stream(0);
    const PathBundle bundle = sample_bundle(s.grid, d, l, s.seed, 0);
    const FlowSamples samples = FlowSamples::at_point(s.start.x, s.flow.y_min, s.flow.y_max, s.flow.y_points);
    const FlowField flow = solve_flow(g, bundle, samples);
    double roundtrip = 0.0;
    for (std::size_t i = 0; i <= s.grid.n_steps(); ++i) {
        for (std::size_t k = 0; k < flow.y_count(); ++k) {
            const double v = flow.eta_at(i, 0, k);
            roundtrip = std::max(roundtrip, std::abs(flow.inverse(s.grid.node(i), s.start.x, v) - flow.y_sample(k)));
        }
    }
    run.write("flow.csv", [&](std::ostream& os) { write_flow_csv(os, flow); });

    // Conversion residual on a ladder of grids sharing one fine path per stream.
    std::vector<double> steps, residuals;
    if (l == 1 && !s.flow.ladder.empty()) {
        const std::size_t fine = *std::max_element(s.flow.ladder.begin(), s.flow.ladder.end());
        std::vector<double> sums(s.flow.ladder.size(), 0.0);
        for (std::uint64_t stream = 0; stream < s.n_b_scenarios; ++stream) {
            const PathBundle fb =
                sample_bundle(TimeGrid(s.grid.t_start(), s.grid.t_end(), fine), d, 1, s.seed, stream);
            for (std::size_t q = 0; q < s.flow.ladder.size(); ++q) {
                const std::size_t n = s.flow.ladder[q];
                if (n == 0 || fine % n != 0) {
                    throw ValidationError("flow.ladder entries must divide the largest entry");
                }
                sums[q] += conversion_residual(g, coarsen(fb, fine / n), s.start.x, s.flow.y_min + 0.75 * (s.flow.y_max - s.flow.y_min));
            }
        }
        for (std::size_t q = 0; q < sums.size(); ++q) {
            steps.push_back(static_cast<double>(s.flow.ladder[q]));
            residuals.push_back(sums[q] / static_cast<double>(s.n_b_scenarios));
        }
        run.write("conversion.csv", [&](std::ostream& os) {
            os << "steps,dt,mean_residual\n";
            for (std::size_t q = 0; q < steps.size(); ++q) {
                fmt::print(os, "{},{:.17g},{:.17g}\n", s.flow.ladder[q],
                           (s.grid.t_end() - s.grid.t_start()) / steps[q], residuals[q]);
            }
        });
    }
    run.write("doss_check.csv", [&](std::ostream& os) {
        os << "metric,value\n";
        fmt::print(os, "min_d_eta_dy,{:.17g}\n", flow.min_d_y());
        fmt::print(os, "roundtrip_error,{:.17g}\n", roundtrip);
        if (steps.size() >= 2 && std::all_of(residuals.begin(), residuals.end(), [](double r) { return r > 0.0; })) {
            fmt::print(os, "conversion_order,{:.17g}\n", -loglog_slope(steps, residuals));
        }
    });
    fmt::print("min D_y eta = {:.6g}, inversion roundtrip = {:.3g}\n", flow.min_d_y(), roundtrip);
    if (steps.size() >= 2) {
        fmt::print("conversion residual order = {:.3f}\n", -loglog_slope(steps, residuals));
    }

    if (s.config.contains("field")) {
        const FieldGrid fg = field_grid(s);
        std::vector<std::uint64_t> streams(s.n_b_scenarios);
        for (std::size_t k = 0; k < streams.size(); ++k) streams[k] = k;
        FieldOptions fo;
        fo.workers = run.workers();
        const auto rep = doss_consistency(field_problem(s), fg, field_scheme(s), streams, {}, fo);
        run.write("doss_consistency.csv", [&](std::ostream& os) {
            os << "b_stream,sup_error,tolerance\n";
            for (std::size_t k = 0; k < rep.b_streams.size(); ++k) {
                fmt::print(os, "{},{:.17g},{:.17g}\n", rep.b_streams[k], rep.sup_errors[k], rep.tolerance);
            }
        });
        fmt::print("Doss consistency: max error {:.3g} vs tolerance {:.3g}: {}\n",
                   *std::max_element(rep.sup_errors.begin(), rep.sup_errors.end()), rep.tolerance,
                   rep.passed ? "pass" : "fail");
    }
}

void cmd_field(Run& run) {
    const Scenario& s = run.scenario();
    run.note_stream(0);
    const FieldGrid fg = field_grid(s);
    FieldOptions fo;
    fo.workers = run.workers();
    const SolutionField field = build_field(field_problem(s), fg, field_scheme(s), fo);
    run.write("field.csv", [&](std::ostream& os) { write_field_csv(os, field); });
    if (s.coeffs.has_obstacle()) {
        const auto gap = obstacle_gap_report(field);
        run.write("obstacle_gap.csv", [&](std::ostream& os) {
            os << "min_gap,mean_gap,worst_violation,violations,tolerance\n";
            fmt::print(os, "{:.17g},{:.17g},{:.17g},{},{:.17g}\n", gap.min_gap, gap.mean_gap,
                       gap.worst_violation, gap.violations, gap.tolerance);
        });
        fmt::print("obstacle gap: min {:.4g}, mean {:.4g}, violations {}\n", gap.min_gap,
                   gap.mean_gap, gap.violations);
    }
    fmt::print("field of {} time nodes x {} points written\n", field.t_nodes.size(), field.x_count());
}

void cmd_residuals(Run& run) {
    const Scenario& s = run.scenario();
    run.note_stream(0);
    const FieldGrid fg = field_grid(s);
    FieldOptions fo;
    fo.workers = run.workers();
    const FieldProblem problem = field_problem(s);
    const SolutionField field = build_field(problem, fg, field_scheme(s), fo);
    const ResidualReport rep = deterministic_pde_residual(field, problem);
    run.write("field.csv", [&](std::ostream& os) { write_field_csv(os, field); });
    run.write("residuals.csv", [&](std::ostream& os) { write_residual_csv(os, rep); });
    print_residual_summary(std::cout, rep);
}

void cmd_probe_b(Run& run) {
    const Scenario& s = run.scenario();
    for (std::uint64_t k = 0; k < s.n_b_scenarios; ++k) run.note_stream(k);
    FieldOptions fo;
    fo.workers = run.workers();
    const ProbeReport rep = b_measurability_probe(field_problem(s), s.start.t, s.start.x,
                                                  s.n_b_scenarios, s.probe_paths, fo);
    run.write("probe.csv", [&](std::ostream& os) { write_probe_csv(os, rep); });
    fmt::print("{:>10} {:>12} {:>14} {:>14}\n", "paths", "mean u", "across var", "within var");
    for (const auto& r : rep.rows) {
        fmt::print("{:>10} {:>12.6f} {:>14.6g} {:>14.6g}\n", r.n_paths, r.mean_u, r.across_variance,
                   r.within_variance);
    }
    if (rep.within_slope) fmt::print("within-variance slope = {:.3f}\n", *rep.within_slope);
}

const std::map<std::string, std::pair<std::string, void (*)(Run&)>>& commands() {
    static const std::map<std::string, std::pair<std::string, void (*)(Run&)>> table{
        {"simulate-x", {"Simulate the reflected diffusion and its local time", cmd_simulate_x}},
        {"solve", {"Solve the backward equation at the start point", cmd_solve}},
        {"penalize-sweep", {"Penalized solutions for a ladder of penalty levels", cmd_penalize_sweep}},
        {"picard", {"Fixed-point iteration for z-dependent noise coefficients", cmd_picard}},
        {"compare", {"Ordering check between shifted coefficient sets", cmd_compare}},
        {"doss-check", {"Flow, inversion and conversion diagnostics", cmd_doss_check}},
        {"field", {"Solution field on a space-time grid", cmd_field}},
        {"residuals", {"Finite-difference residuals of a deterministic field", cmd_residuals}},
        {"probe-b", {"Variance split across backward paths", cmd_probe_b}},
    };
    return table;
}

json apply_overrides(json doc, const Flags& f) {
    if (!doc.is_object()) throw ValidationError("scenario must be a JSON object");
    auto section = [&](const char* key) -> json& {
        if (!doc.contains(key)) doc[key] = json::object();
        return doc[key];
    };
    if (f.seed) doc["seed"] = *f.seed;
    if (f.paths) section("grid")["paths"] = *f.paths;
    if (f.steps) section("grid")["steps"] = *f.steps;
    if (f.b_scenarios) section("grid")["b_scenarios"] = *f.b_scenarios;
    if (!f.levels.empty()) section("penalize")["levels"] = f.levels;
    return doc;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Reflected backward doubly stochastic equations: simulation and diagnostics", "rbdsde"};
    app.require_subcommand(1);
    Flags flags;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--scenario", flags.scenario, "Scenario JSON file")->required();
        sub->add_option("--seed", flags.seed, "Master seed (overrides the scenario)");
        sub->add_option("--workers", flags.workers, "Worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", flags.out, "Output directory (default: $RBDSDE_OUT, then the scenario)");
        sub->add_option("--paths", flags.paths, "Number of forward paths")->check(CLI::PositiveNumber);
        sub->add_option("--steps", flags.steps, "Number of time steps")->check(CLI::PositiveNumber);
        sub->add_option("--b-scenarios", flags.b_scenarios, "Number of backward paths")
            ->check(CLI::PositiveNumber);
        if (name == "penalize-sweep") {
            sub->add_option("--n", flags.levels, "Penalty levels, comma separated")->delimiter(',');
        }
        subs[name] = sub;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const json doc = apply_overrides(read_scenario_file(flags.scenario), flags);
        Run run(command, flags, parse_scenario(doc));
        commands().at(command).second(run);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run.finish(wall);
        return 0;
    } catch (const ValidationError& e) {
        fmt::print(stderr, "error: invalid input: {}\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        fmt::print(stderr, "error: numerical failure: {}\n", e.what());
        return 3;
    } catch (const fs::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
}

}  // namespace rbdsde::cli
