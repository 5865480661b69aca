#pragma once

#include "rbdsde/bdsde_solver.hpp"
#include "rbdsde/coefficients.hpp"
#include "rbdsde/geometry.hpp"
#include "rbdsde/reflected_sde.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rbdsde::cli {

struct FieldSettings {
    std::size_t t_nodes = 11;
    std::size_t x_points = 21;
    std::optional<double> x_min;  // same bounds on every axis; default: domain bounding box
    std::optional<double> x_max;
};

struct PicardSettings {
    std::optional<double> alpha_prime;
    double tolerance = 1e-4;
    std::size_t max_iterations = 8;
};

struct CompareSettings {
    std::string shift = "terminal";
    double amount = 1.0;
};

struct FlowSettings {
    double y_min = -5.0;
    double y_max = 5.0;
    std::size_t y_points = 201;
    std::vector<std::size_t> ladder{256, 512, 1024, 2048, 4096};
};

struct ScalingSettings {
    std::vector<double> gaps{0.25, 0.125, 0.0625, 0.03125, 0.015625};
    double exponent = 5.0;
};

/// A fully validated run description.
struct Scenario {
    std::string name;
    std::string builtin;
    nlohmann::json config;  // effective document, after command-line overrides

    Domain domain = Domain::ball({0.0}, 1.0);
    SdeSpec sde;
    CoefficientSet coeffs;

    TimeGrid grid{0.0, 1.0, 20};
    std::size_t n_paths = 1000;
    std::size_t n_b_scenarios = 3;
    StartPoint start;

    Scheme scheme = Scheme::generalized;
    double penalty = 0.0;
    SolverOptions options;

    std::uint64_t seed = 0;
    std::optional<std::string> output;

    FieldSettings field;
    PicardSettings picard;
    std::vector<double> penalty_levels{4, 16, 64, 256};
    CompareSettings compare;
    std::vector<std::size_t> probe_paths{500, 1000, 2000, 4000};
    FlowSettings flow;
    ScalingSettings scaling;
};

/// Parses a scenario document. Unknown keys anywhere are rejected; every
/// range is checked before anything is simulated. Throws ValidationError.
Scenario parse_scenario(const nlohmann::json& doc);

/// Reads and parses a scenario file; a missing file is reported with its path.
nlohmann::json read_scenario_file(const std::filesystem::path& path);

/// Built-in coefficient families by name.
std::vector<std::string> builtin_names();

/// Coefficients of `name` in dimension `dim` with the given parameters.
CoefficientSet make_builtin(const std::string& name, const nlohmann::json& params, std::size_t dim);

/// Upper member of a comparison pair: the coefficient set shifted by
/// `amount` in the named ingredient (terminal, driver, boundary,
/// terminal_quadratic, driver_z).
CoefficientSet shifted_coefficients(const CoefficientSet& base, const std::string& shift,
                                    double amount);

}  // namespace rbdsde::cli
