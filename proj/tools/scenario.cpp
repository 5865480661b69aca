#include "scenario.hpp"

#include "rbdsde/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace rbdsde::cli {
namespace {

using nlohmann::json;

// Object view that remembers which keys were read, so that leftovers can be
// rejected as unknown.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ValidationError(where_ + " must be a JSON object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return convert<T>(obj_.at(key), key);
    }

    template <class T>
    T require(const std::string& key) {
        if (!has(key)) throw ValidationError(fmt::format("{}: missing required key '{}'", where_, key));
        return convert<T>(obj_.at(key), key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) {
                throw ValidationError(fmt::format("{}: unknown key '{}'", where_, key));
            }
        }
    }

private:
    template <class T>
    T convert(const json& v, const std::string& key) const {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ValidationError("");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
                    throw ValidationError("");
                }
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ValidationError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ValidationError("");
            }
            return v.get<T>();
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("{}.{}: value {} has the wrong type", where_, key, v.dump()));
        }
    }

    json obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

double sum_sq(std::span<const double> x, double center = 0.0) {
    double s = 0.0;
    for (double v : x) s += (v - center) * (v - center);
    return s;
}

// Parameters of a built-in family, with defaults; unknown names rejected.
class Params {
public:
    Params(const json& given, std::string family, std::map<std::string, double> defaults)
        : values_(std::move(defaults)) {
        if (given.is_null()) return;
        if (!given.is_object()) throw ValidationError("coefficients.params must be a JSON object");
        for (const auto& [key, value] : given.items()) {
            if (!values_.count(key)) {
                throw ValidationError(fmt::format("coefficients.params: unknown parameter '{}' for {}",
                                                  key, family));
            }
            if (!value.is_number()) {
                throw ValidationError(fmt::format("coefficients.params.{} must be a number", key));
            }
            values_[key] = value.get<double>();
        }
    }
    double operator[](const std::string& key) const { return values_.at(key); }

private:
    std::map<std::string, double> values_;
};

Domain parse_domain(const json& j) {
    Reader r(j, "domain");
    const auto kind = r.require<std::string>("kind");
    std::optional<Domain> domain;
    if (kind == "ball") {
        domain = Domain::ball(r.require<std::vector<double>>("center"), r.require<double>("radius"));
    } else if (kind == "ellipsoid") {
        domain = Domain::ellipsoid(r.require<std::vector<double>>("center"),
                                   r.require<std::vector<double>>("semi_axes"));
    } else {
        throw ValidationError("domain.kind must be 'ball' or 'ellipsoid' (got '" + kind + "')");
    }
    if (r.has("boundary_tolerance")) {
        domain->set_boundary_tolerance(r.require<double>("boundary_tolerance"));
    }
    r.finish();
    return *domain;
}

SdeSpec parse_sde(const json& j, std::size_t dim) {
    Reader r(j, "sde");
    auto drift = r.get<std::vector<double>>("drift_constant", std::vector<double>(dim, 0.0));
    const double drift_rate = r.get<double>("drift_rate", 0.0);
    const double vol_constant = r.get<double>("vol_constant", 1.0);
    const double vol_rate = r.get<double>("vol_rate", 0.0);
    r.finish();
    require(drift.size() == dim, "sde.drift_constant must have one entry per dimension");
    return SdeSpec::affine(dim, std::move(drift), drift_rate, vol_constant, vol_rate);
}

void apply_obstacle(CoefficientSet& c, const std::string& builtin, const json& spec) {
    if (spec.is_boolean()) {
        if (!spec.get<bool>()) {
            c.obstacle = nullptr;
            return;
        }
        require(builtin == "american_put",
                "coefficients.obstacle: 'true' only selects the payoff of american_put; give an "
                "object such as {\"kind\": \"terminal_minus\", \"gap\": 0.1}");
        return;
    }
    Reader r(spec, "coefficients.obstacle");
    const auto kind = r.require<std::string>("kind");
    if (kind == "constant") {
        const double level = r.require<double>("level");
        c.obstacle = [level](double, std::span<const double>) { return level; };
    } else if (kind == "terminal_minus") {
        const double gap = r.require<double>("gap");
        require(gap >= 0.0, "coefficients.obstacle.gap must be nonnegative");
        const TerminalFn l = c.terminal;
        c.obstacle = [l, gap](double, std::span<const double> x) { return l(x) - gap; };
    } else {
        throw ValidationError("coefficients.obstacle.kind must be 'constant' or 'terminal_minus'");
    }
    r.finish();
}

StructuralConstants parse_constants(const json& j, StructuralConstants k) {
    Reader r(j, "coefficients.constants");
    k.c = r.get<double>("c", k.c);
    k.lipschitz = r.get<double>("lipschitz", k.lipschitz);
    k.beta = r.get<double>("beta", k.beta);
    k.alpha = r.get<double>("alpha", k.alpha);
    k.mu = r.get<double>("mu", k.mu);
    r.finish();
    return k;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"heat",           "linear_fk",      "american_put", "neumann_drift",
            "exp_noise_flow", "additive_noise", "z_noise"};
}

CoefficientSet make_builtin(const std::string& name, const json& params, std::size_t dim) {
    CoefficientSet c;
    c.dim = dim;
    if (name == "heat") {
        const Params p(params, name, {{"frequency", 1.0}});
        const double w = p["frequency"];
        c.terminal = [w](std::span<const double> x) {
            double v = 1.0;
            for (double xi : x) v *= std::cos(w * xi);
            return v;
        };
    } else if (name == "linear_fk") {
        const Params p(params, name, {{"rate", 0.5}});
        const double a = p["rate"];
        c.terminal = [](std::span<const double> x) { return sum_sq(x); };
        c.driver = [a](double, std::span<const double>, double y, std::span<const double>) {
            return a * y;
        };
        c.constants.c = std::abs(a);
    } else if (name == "american_put") {
        const Params p(params, name, {{"strike", 1.0}, {"rate", 0.06}});
        const double strike = p["strike"];
        const double rate = p["rate"];
        require(strike > 0.0, "american_put.strike must be positive");
        c.terminal = [strike](std::span<const double> x) { return std::max(strike - x[0], 0.0); };
        c.obstacle = [strike](double, std::span<const double> x) {
            return std::max(strike - x[0], 0.0);
        };
        c.driver = [rate](double, std::span<const double>, double y, std::span<const double>) {
            return -rate * y;
        };
        c.constants.c = std::abs(rate);
    } else if (name == "neumann_drift") {
        const Params p(params, name, {{"center", 0.5}, {"level", 1.25}, {"rate", 1.0}});
        const double center = p["center"];
        const double level = p["level"];
        const double rate = p["rate"];
        c.terminal = [center](std::span<const double> x) { return sum_sq(x, center); };
        c.boundary = [level, rate](double, std::span<const double>, double y) {
            return level - rate * y;
        };
        c.constants.beta = -rate;
    } else if (name == "exp_noise_flow") {
        const Params p(params, name, {{"slope", 1.0}});
        const double slope = p["slope"];
        c.terminal = [](std::span<const double> x) { return 1.0 + sum_sq(x); };
        c.noise = NoiseCoefficient::linear(slope);
        c.constants.c = std::abs(slope);
    } else if (name == "additive_noise") {
        const Params p(params, name, {{"gamma", 0.5}, {"rate", -0.5}, {"boundary_rate", 0.0}});
        const double rate = p["rate"];
        const double boundary_rate = p["boundary_rate"];
        c.terminal = [](std::span<const double> x) {
            double v = 0.0;
            for (double xi : x) v += std::cos(xi);
            return v;
        };
        c.driver = [rate](double, std::span<const double>, double y, std::span<const double>) {
            return rate * y;
        };
        if (boundary_rate > 0.0) {
            c.boundary = [boundary_rate](double, std::span<const double>, double y) {
                return -boundary_rate * y;
            };
            c.constants.beta = -boundary_rate;
        }
        c.noise = NoiseCoefficient::constant({p["gamma"]});
        c.constants.c = std::abs(rate);
    } else if (name == "z_noise") {
        const Params p(params, name,
                       {{"slope", 0.3},
                        {"z_weight", 0.25},
                        {"rate", -0.5},
                        {"boundary_rate", 1.0},
                        {"center", 0.5}});
        const double rate = p["rate"];
        const double boundary_rate = p["boundary_rate"];
        const double center = p["center"];
        require(boundary_rate > 0.0, "z_noise.boundary_rate must be positive");
        c.terminal = [center](std::span<const double> x) { return sum_sq(x, center); };
        c.driver = [rate](double, std::span<const double>, double y, std::span<const double>) {
            return rate * y;
        };
        c.boundary = [boundary_rate](double, std::span<const double>, double y) {
            return -boundary_rate * y;
        };
        c.noise = NoiseCoefficient::linear(p["slope"], p["z_weight"]);
        c.constants.beta = -boundary_rate;
        c.constants.alpha = std::abs(p["z_weight"]) > 0.0 ? std::abs(p["z_weight"]) : 0.5;
        c.constants.c = std::max(std::abs(rate), std::abs(p["slope"]));
    } else {
        std::string known;
        for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
        throw ValidationError(fmt::format("unknown built-in coefficient set '{}' (known: {})", name, known));
    }
    return c;
}

CoefficientSet shifted_coefficients(const CoefficientSet& base, const std::string& shift,
                                    double amount) {
    require(amount >= 0.0, "comparison shift amount must be nonnegative");
    CoefficientSet c = base;
    if (shift == "terminal") {
        const TerminalFn l = base.terminal;
        c.terminal = [l, amount](std::span<const double> x) { return l(x) + amount; };
    } else if (shift == "terminal_quadratic") {
        const TerminalFn l = base.terminal;
        c.terminal = [l, amount](std::span<const double> x) { return l(x) + amount * sum_sq(x); };
    } else if (shift == "driver") {
        const DriverFn f = base.driver;
        c.driver = [f, amount](double t, std::span<const double> x, double y,
                               std::span<const double> z) { return (f ? f(t, x, y, z) : 0.0) + amount; };
    } else if (shift == "driver_z") {
        const DriverFn f = base.driver;
        c.driver = [f, amount](double t, std::span<const double> x, double y,
                               std::span<const double> z) {
            return (f ? f(t, x, y, z) : 0.0) + amount * std::abs(z[0]);
        };
    } else if (shift == "boundary") {
        const BoundaryFn phi = base.boundary;
        c.boundary = [phi, amount](double t, std::span<const double> x, double y) {
            return (phi ? phi(t, x, y) : 0.0) + amount;
        };
    } else {
        throw ValidationError("compare.shift must be one of terminal, terminal_quadratic, driver, "
                              "driver_z, boundary (got '" + shift + "')");
    }
    return c;
}

json read_scenario_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open scenario file " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario file " + path.string() + " is not valid JSON: " + e.what());
    }
}

Scenario parse_scenario(const json& doc) {
    Scenario s;
    s.config = doc;
    Reader top(doc, "scenario");
    s.name = top.get<std::string>("name", "scenario");
    require(top.has("domain"), "scenario: missing required key 'domain'");
    s.domain = parse_domain(top.raw("domain"));
    const std::size_t d = s.domain.dimension();
    s.sde = parse_sde(top.has("sde") ? top.raw("sde") : json::object(), d);

    // coefficients
    require(top.has("coefficients"), "scenario: missing required key 'coefficients'");
    {
        Reader r(top.raw("coefficients"), "coefficients");
        s.builtin = r.require<std::string>("builtin");
        s.coeffs = make_builtin(s.builtin, r.has("params") ? r.raw("params") : json(), d);
        if (r.has("obstacle")) apply_obstacle(s.coeffs, s.builtin, r.raw("obstacle"));
        if (r.has("constants")) s.coeffs.constants = parse_constants(r.raw("constants"), s.coeffs.constants);
        r.finish();
    }

    // grid
    double t_start = 0.0, t_end = 1.0;
    std::size_t steps = 100;
    {
        Reader r(top.has("grid") ? top.raw("grid") : json::object(), "grid");
        t_start = r.get<double>("t_start", 0.0);
        t_end = r.get<double>("t_end", 1.0);
        steps = r.get<std::size_t>("steps", 100);
        s.n_paths = r.get<std::size_t>("paths", 1000);
        s.n_b_scenarios = r.get<std::size_t>("b_scenarios", 3);
        r.finish();
    }
    require(t_end > t_start, "grid.t_end must exceed grid.t_start");
    require(steps >= 1, "grid.steps must be at least 1");
    require(s.n_paths >= 2, "grid.paths must be at least 2");
    require(s.n_b_scenarios >= 1, "grid.b_scenarios must be at least 1");
    s.grid = TimeGrid(t_start, t_end, steps);

    // start
    {
        const auto [lo, hi] = s.domain.bounding_box();
        Point center(d);
        for (std::size_t k = 0; k < d; ++k) center[k] = 0.5 * (lo[k] + hi[k]);
        Reader r(top.has("start") ? top.raw("start") : json::object(), "start");
        s.start.t = r.get<double>("t", t_start);
        s.start.x = r.get<std::vector<double>>("x", center);
        r.finish();
        require(s.start.x.size() == d, "start.x must have one entry per dimension");
        require(in_closure(s.domain, s.start.x), "start.x must lie in the closure of the domain");
        s.grid.node_index(s.start.t);
    }

    // scheme
    {
        Reader r(top.has("scheme") ? top.raw("scheme") : json::object(), "scheme");
        const std::string fallback = s.coeffs.has_obstacle() ? "direct" : "generalized";
        const auto kind = r.get<std::string>("kind", fallback);
        if (kind == "generalized") {
            s.scheme = Scheme::generalized;
        } else if (kind == "direct") {
            s.scheme = Scheme::direct;
        } else if (kind == "penalized") {
            s.scheme = Scheme::penalized;
        } else {
            throw ValidationError("scheme.kind must be generalized, direct or penalized (got '" + kind + "')");
        }
        s.penalty = r.get<double>("penalty", 0.0);
        s.options.picard_pass = r.get<bool>("picard_pass", false);
        s.options.basis.degree = r.get<std::size_t>("degree", 3);
        s.options.basis.obstacle_column = r.get<bool>("obstacle_column", true);
        s.options.basis.ridge = r.get<double>("ridge", 1e-8);
        s.options.stiffness_cap = r.get<double>("stiffness_cap", 0.5);
        s.options.implicit_penalty = r.get<bool>("implicit_penalty", true);
        r.finish();
        require(s.penalty >= 0.0, "scheme.penalty must be nonnegative");
        require(s.options.basis.ridge >= 0.0, "scheme.ridge must be nonnegative");
        require(s.options.stiffness_cap > 0.0, "scheme.stiffness_cap must be positive");
        if (s.scheme != Scheme::generalized) {
            require(s.coeffs.has_obstacle(), "scheme '" + kind + "' needs an obstacle");
        }
        if (s.scheme == Scheme::generalized && s.coeffs.has_obstacle()) {
            throw ValidationError("an obstacle is configured; use scheme 'direct' or 'penalized'");
        }
    }

    s.seed = top.get<std::uint64_t>("seed", 0);
    if (top.has("output")) s.output = top.require<std::string>("output");

    if (top.has("field")) {
        Reader r(top.raw("field"), "field");
        s.field.t_nodes = r.get<std::size_t>("t_nodes", s.field.t_nodes);
        s.field.x_points = r.get<std::size_t>("x_points", s.field.x_points);
        if (r.has("x_min")) s.field.x_min = r.require<double>("x_min");
        if (r.has("x_max")) s.field.x_max = r.require<double>("x_max");
        require(s.field.x_min.has_value() == s.field.x_max.has_value(),
                "field.x_min and field.x_max must be given together");
        require(!s.field.x_min || *s.field.x_min <= *s.field.x_max, "field.x_min must not exceed field.x_max");
        r.finish();
    }
    if (top.has("picard")) {
        Reader r(top.raw("picard"), "picard");
        if (r.has("alpha_prime")) s.picard.alpha_prime = r.require<double>("alpha_prime");
        s.picard.tolerance = r.get<double>("tolerance", s.picard.tolerance);
        s.picard.max_iterations = r.get<std::size_t>("max_iterations", s.picard.max_iterations);
        r.finish();
        require(s.picard.tolerance > 0.0, "picard.tolerance must be positive");
    }
    if (top.has("penalize")) {
        Reader r(top.raw("penalize"), "penalize");
        s.penalty_levels = r.get<std::vector<double>>("levels", s.penalty_levels);
        r.finish();
    }
    if (top.has("compare")) {
        Reader r(top.raw("compare"), "compare");
        s.compare.shift = r.get<std::string>("shift", s.compare.shift);
        s.compare.amount = r.get<double>("amount", s.compare.amount);
        r.finish();
        shifted_coefficients(s.coeffs, s.compare.shift, s.compare.amount);
    }
    if (top.has("probe")) {
        Reader r(top.raw("probe"), "probe");
        s.probe_paths = r.get<std::vector<std::size_t>>("path_counts", s.probe_paths);
        r.finish();
    }
    if (top.has("flow")) {
        Reader r(top.raw("flow"), "flow");
        s.flow.y_min = r.get<double>("y_min", s.flow.y_min);
        s.flow.y_max = r.get<double>("y_max", s.flow.y_max);
        s.flow.y_points = r.get<std::size_t>("y_points", s.flow.y_points);
        s.flow.ladder = r.get<std::vector<std::size_t>>("ladder", s.flow.ladder);
        r.finish();
        require(s.flow.y_max > s.flow.y_min && s.flow.y_points >= 4,
                "flow needs y_max > y_min and at least 4 y points");
    }
    if (top.has("scaling")) {
        Reader r(top.raw("scaling"), "scaling");
        s.scaling.gaps = r.get<std::vector<double>>("gaps", s.scaling.gaps);
        s.scaling.exponent = r.get<double>("exponent", s.scaling.exponent);
        r.finish();
        require(s.scaling.exponent > 4.0, "scaling.exponent must exceed 4");
    }
    top.finish();

    for (double n : s.penalty_levels) require(n >= 0.0, "penalize.levels must be nonnegative");
    validate_coefficients(s.coeffs, s.domain, t_end);
    return s;
}

}  // namespace rbdsde::cli
