#include "rbdsde/bdsde_solver.hpp"
#include "rbdsde/doss_sussman.hpp"
#include "rbdsde/regression.hpp"
#include "rbdsde/reflected_sde.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace rbdsde;

namespace {

void regression_fit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    std::vector<double> x(n), extra(n), target(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = normal(rng);
        extra[i] = std::max(1.0 - x[i], 0.0);
        target[i] = std::sin(x[i]) + 0.1 * normal(rng);
    }
    for (auto _ : state) {
        const ConditionalExpectation ce(RegressionBasis{}, x, 1, extra);
        benchmark::DoNotOptimize(ce.fit(target));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(regression_fit)->Arg(1000)->Arg(10000)->Arg(100000);

void ensemble_simulation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TimeGrid g(0.0, 1.0, 100);
    const Domain d = Domain::ball({0.5}, 0.5);
    const SdeSpec s = SdeSpec::affine(1, {0.0}, 0.0, 1.0, 0.0);
    for (auto _ : state) {
        const PathEnsemble e = sample_ensemble(g, 1, 1, n, 3, 0);
        benchmark::DoNotOptimize(simulate_ensemble(d, s, {0.0, {0.5}}, e));
    }
}
BENCHMARK(ensemble_simulation)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void backward_solve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TimeGrid g(0.0, 1.0, 50);
    const PathEnsemble e = sample_ensemble(g, 1, 1, n, 4, 0);
    const ReflectedEnsemble r =
        simulate_ensemble(Domain::ball({1.0}, 10.0), SdeSpec::affine(1, {0.0}, 0.06, 0.0, 0.2), {0.0, {0.9}}, e);
    CoefficientSet c;
    c.terminal = [](std::span<const double> x) { return std::max(1.0 - x[0], 0.0); };
    c.obstacle = [](double, std::span<const double> x) { return std::max(1.0 - x[0], 0.0); };
    c.driver = [](double, std::span<const double>, double y, std::span<const double>) { return -0.06 * y; };
    for (auto _ : state) benchmark::DoNotOptimize(solve_reflected_direct(c, r, e));
}
BENCHMARK(backward_solve)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void flow_solve(benchmark::State& state) {
    const TimeGrid g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
    const PathBundle b = sample_bundle(g, 1, 1, 5, 0);
    const std::vector<double> x{0.0};
    const FlowSamples s = FlowSamples::at_point(x, -3.0, 3.0, 61);
    for (auto _ : state) benchmark::DoNotOptimize(solve_flow(NoiseCoefficient::linear(1.0), b, s));
}
BENCHMARK(flow_solve)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
