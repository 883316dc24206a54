#include "vdlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vdlab/error.hpp"

namespace vdlab::runner {
namespace {

// Problems inside a setter; the caller adds the location.
struct BadValue {
    std::string message;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) throw BadValue{"expected a finite number, got '" + v + "'"};
    return out;
}

long long to_integer(const std::string& v) {
    long long out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw BadValue{"expected an integer, got '" + v + "'"};
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw BadValue{"expected true or false, got '" + v + "'"};
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw BadValue{"expected a comma-separated list of numbers"};
    return out;
}

double positive(const std::string& v) {
    const double x = to_double(v);
    if (!(x > 0.0)) throw BadValue{"must be > 0, got " + v};
    return x;
}

double nonnegative(const std::string& v) {
    const double x = to_double(v);
    if (x < 0.0) throw BadValue{"must be >= 0, got " + v};
    return x;
}

std::size_t at_least(const std::string& v, long long lo) {
    const long long x = to_integer(v);
    if (x < lo) throw BadValue{">= " + std::to_string(lo) + " required, got " + v};
    return static_cast<std::size_t>(x);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct KeyDef {
    KeyInfo info;
    Setter set;
};

const std::vector<KeyDef>& definitions() {
    static const std::vector<KeyDef> defs = {
        {{"run.experiment", "identity-suite", "experiment name, or 'all'"},
         [](RunConfig& c, const std::string& v) {
             if (v == "all") {
                 c.all = true;
                 return;
             }
             c.all = false;
             try {
                 c.experiment = experiment_from_string(v);
             } catch (const ConfigError& e) {
                 throw BadValue{e.what()};
             }
         }},
        {{"run.seed", "1", "base seed of the manufactured-field factory"},
         [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(at_least(v, 0)); }},
        {{"run.refine_levels", "3", "number of grid levels in refinement studies"},
         [](RunConfig& c, const std::string& v) {
             const auto n = at_least(v, 1);
             if (n > 6) throw BadValue{"at most 6 levels, got " + v};
             c.refine_levels = static_cast<int>(n);
         }},

        {{"grid.points_per_axis", "32", "spatial samples at the base level"},
         [](RunConfig& c, const std::string& v) { c.grid.points_per_axis = at_least(v, 5); }},
        {{"grid.time_points", "33", "time samples at the base level"},
         [](RunConfig& c, const std::string& v) { c.grid.time_points = at_least(v, 5); }},
        {{"grid.t_lo", "0", "first time sample"}, [](RunConfig& c, const std::string& v) { c.grid.t_lo = to_double(v); }},
        {{"grid.t_hi", "1", "last time sample"}, [](RunConfig& c, const std::string& v) { c.grid.t_hi = to_double(v); }},
        {{"grid.x_lo", "0", "spatial lower bound"}, [](RunConfig& c, const std::string& v) { c.grid.x_lo = to_double(v); }},
        {{"grid.x_hi", "6.283185307179586", "spatial upper bound (excluded when periodic)"},
         [](RunConfig& c, const std::string& v) { c.grid.x_hi = to_double(v); }},
        {{"grid.metric_t", "1", "g_tt, must be > 0"},
         [](RunConfig& c, const std::string& v) { c.grid.metric_t = positive(v); }},
        {{"grid.metric_x", "-1", "g_xx, must be < 0"},
         [](RunConfig& c, const std::string& v) {
             const double x = to_double(v);
             if (!(x < 0.0)) throw BadValue{"must be < 0 for signature (+,-), got " + v};
             c.grid.metric_x = x;
         }},
        {{"grid.boundary", "periodic", "periodic or one-sided (spatial axis)"},
         [](RunConfig& c, const std::string& v) {
             try {
                 c.grid.boundary = boundary_from_string(v);
             } catch (const Error& e) {
                 throw BadValue{e.what()};
             }
         }},

        {{"physics.mass", "1", "rest mass m"}, [](RunConfig& c, const std::string& v) { c.physics.mass = positive(v); }},
        {{"physics.hbar", "1", "reduced Planck constant"},
         [](RunConfig& c, const std::string& v) { c.physics.hbar = positive(v); }},
        {{"physics.kappa", "1", "gravitational coupling in the action"},
         [](RunConfig& c, const std::string& v) { c.physics.kappa = positive(v); }},
        {{"physics.sigma", "1", "Gaussian density width"},
         [](RunConfig& c, const std::string& v) { c.physics.sigma = positive(v); }},
        {{"physics.lambda0", "1", "vacuum field at the anchor x0"},
         [](RunConfig& c, const std::string& v) { c.physics.lambda0 = to_double(v); }},
        {{"physics.x0", "1.5", "anchor point of the vacuum-field solve"},
         [](RunConfig& c, const std::string& v) { c.physics.x0 = to_double(v); }},
        {{"physics.domain_lo", "1.2", "lower end of the static vacuum-field domain"},
         [](RunConfig& c, const std::string& v) { c.physics.domain_lo = to_double(v); }},
        {{"physics.domain_hi", "3", "upper end of the static vacuum-field domain"},
         [](RunConfig& c, const std::string& v) { c.physics.domain_hi = to_double(v); }},
        {{"physics.masses", "0.8, 0.4, 0.2, 0.1", "geometric, decreasing mass sequence for the m -> 0 study"},
         [](RunConfig& c, const std::string& v) { c.physics.masses = to_list(v); }},
        {{"physics.probes", "1.6, 2.2", "spatial probe points of the m -> 0 study"},
         [](RunConfig& c, const std::string& v) { c.physics.probes = to_list(v); }},
        {{"physics.protocol", "resolved", "vacuum field in the m -> 0 study: zero, fixed or resolved"},
         [](RunConfig& c, const std::string& v) {
             try {
                 c.physics.protocol = vacuum::protocol_from_string(v);
             } catch (const Error& e) {
                 throw BadValue{e.what()};
             }
         }},
        {{"physics.include_conformal", "true", "divide the vacuum mass by Omega^2 = exp(Q)"},
         [](RunConfig& c, const std::string& v) { c.physics.include_conformal = to_bool(v); }},
        {{"physics.branch", "plus", "square-root branch of the vacuum mass: plus or minus"},
         [](RunConfig& c, const std::string& v) {
             if (v == "plus") c.physics.branch = vacuum::Branch::plus;
             else if (v == "minus") c.physics.branch = vacuum::Branch::minus;
             else throw BadValue{"expected plus or minus, got '" + v + "'"};
         }},
        {{"physics.momentum", "2", "plane-wave momentum (whole windings on periodic grids)"},
         [](RunConfig& c, const std::string& v) { c.physics.momentum = to_double(v); }},
        {{"physics.vacuum_mass", "0.5", "constant vacuum mass of the dispersion scan"},
         [](RunConfig& c, const std::string& v) { c.physics.vacuum_mass = to_double(v); }},
        {{"physics.k_min", "-5", "first wavenumber of the dispersion scan"},
         [](RunConfig& c, const std::string& v) { c.physics.k_min = to_double(v); }},
        {{"physics.k_max", "5", "last wavenumber of the dispersion scan"},
         [](RunConfig& c, const std::string& v) { c.physics.k_max = to_double(v); }},
        {{"physics.k_points", "50", "wavenumbers in the dispersion scan"},
         [](RunConfig& c, const std::string& v) { c.physics.k_points = at_least(v, 2); }},

        {{"numerics.order", "2", "stencil order, 2 or 4"},
         [](RunConfig& c, const std::string& v) {
             const auto n = to_integer(v);
             if (n != 2 && n != 4) throw BadValue{"expected 2 or 4, got " + v};
             c.numerics.order = n == 2 ? StencilOrder::second : StencilOrder::fourth;
         }},
        {{"numerics.derivative_mode", "stencil", "stencil or analytic, for single-level evaluations"},
         [](RunConfig& c, const std::string& v) {
             if (v != "stencil" && v != "analytic") throw BadValue{"expected stencil or analytic, got '" + v + "'"};
             c.numerics.derivative_mode = v;
         }},
        {{"numerics.smoothness", "2", "highest Fourier mode of manufactured fields"},
         [](RunConfig& c, const std::string& v) { c.numerics.smoothness = static_cast<int>(at_least(v, 0)); }},
        {{"numerics.corpus_size", "10", "number of seeded manufactured fields"},
         [](RunConfig& c, const std::string& v) { c.numerics.corpus_size = at_least(v, 1); }},
        {{"numerics.delta_u", "1e-6", "singularity threshold on |u|"},
         [](RunConfig& c, const std::string& v) { c.numerics.delta_u = positive(v); }},
        {{"numerics.delta_Q", "1e-6", "singularity threshold on |1 - Q|"},
         [](RunConfig& c, const std::string& v) { c.numerics.delta_Q = positive(v); }},
        {{"numerics.rho_floor", "1e-12", "smallest admissible density"},
         [](RunConfig& c, const std::string& v) { c.numerics.rho_floor = positive(v); }},
        {{"numerics.gradient_epsilon", "1e-6", "finite-difference step of the action gradient"},
         [](RunConfig& c, const std::string& v) { c.numerics.gradient_epsilon = positive(v); }},
        {{"numerics.steps_per_cell", "8", "RK4 steps per grid cell in the vacuum-field solve"},
         [](RunConfig& c, const std::string& v) { c.numerics.steps_per_cell = at_least(v, 1); }},
        {{"numerics.lambda_points", "181", "spatial samples of the static vacuum-field grid"},
         [](RunConfig& c, const std::string& v) { c.numerics.lambda_points = at_least(v, 5); }},
        {{"numerics.tol_analytic", "1e-10", "relative bound for identities with analytic derivatives"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_analytic = nonnegative(v); }},
        {{"numerics.tol_plane_wave", "1e-8", "bound for the plane-wave reduction"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_plane_wave = nonnegative(v); }},
        {{"numerics.tol_identity", "1e-12", "relative bound for algebraic substitutions"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_identity = nonnegative(v); }},
        {{"numerics.tol_gradient", "1e-3", "relative bound on FD vs Euler-Lagrange gradients"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_gradient = nonnegative(v); }},
        {{"numerics.tol_stationary", "1e-6", "bound on action gradients at a plane wave"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_stationary = nonnegative(v); }},
        {{"numerics.tol_closure", "1e-8", "relative forward-backward closure bound"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_closure = nonnegative(v); }},
        {{"numerics.tol_lambda", "1e-8", "relative bound of the grid vacuum field against its closed form"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_lambda = nonnegative(v); }},
        {{"numerics.tol_dispersion", "1e-12", "bound on eigenvalue vs closed-form energy"},
         [](RunConfig& c, const std::string& v) { c.numerics.tol_dispersion = nonnegative(v); }},
        {{"numerics.ratio_lo", "3.5", "lower bound of second-order refinement ratios"},
         [](RunConfig& c, const std::string& v) { c.numerics.ratio_lo = positive(v); }},
        {{"numerics.ratio_hi", "4.5", "upper bound of second-order refinement ratios"},
         [](RunConfig& c, const std::string& v) { c.numerics.ratio_hi = positive(v); }},
        {{"numerics.rk4_ratio_lo", "12", "lower bound of RK4 step-halving ratios"},
         [](RunConfig& c, const std::string& v) { c.numerics.rk4_ratio_lo = positive(v); }},
        {{"numerics.rk4_ratio_hi", "20", "upper bound of RK4 step-halving ratios"},
         [](RunConfig& c, const std::string& v) { c.numerics.rk4_ratio_hi = positive(v); }},

        {{"output.dir", "vdlab-out", "output directory (VDLAB_OUT and --out override)"},
         [](RunConfig& c, const std::string& v) {
             if (v.empty()) throw BadValue{"must not be empty"};
             c.output_dir = v;
         }},
    };
    return defs;
}

const KeyDef* find_key(const std::string& name) {
    for (const auto& d : definitions()) {
        if (d.info.name == name) return &d;
    }
    return nullptr;
}

bool known_section(const std::string& s) {
    return s == "run" || s == "grid" || s == "physics" || s == "numerics" || s == "output";
}

struct Entry {
    std::string value;
    std::string origin;
};

void cross_validate(const RunConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(c.grid.t_hi > c.grid.t_lo)) fail("grid.t_hi must exceed grid.t_lo");
    if (!(c.grid.x_hi > c.grid.x_lo)) fail("grid.x_hi must exceed grid.x_lo");
    if (!(c.physics.domain_hi > c.physics.domain_lo)) fail("physics.domain_hi must exceed physics.domain_lo");
    if (c.physics.x0 < c.physics.domain_lo || c.physics.x0 > c.physics.domain_hi) {
        fail("physics.x0 must lie inside [physics.domain_lo, physics.domain_hi]");
    }
    for (double p : c.physics.probes) {
        if (p < c.physics.domain_lo || p > c.physics.domain_hi) fail("physics.probes must lie inside the domain");
    }
    const auto& m = c.physics.masses;
    for (double v : m) {
        if (!(v > 0.0)) fail("physics.masses must be positive");
    }
    if (m.size() >= 2) {
        const double r = m[1] / m[0];
        if (!(r < 1.0)) fail("physics.masses must decrease");
        for (std::size_t k = 1; k < m.size(); ++k) {
            if (std::abs(m[k] / m[k - 1] - r) > 1e-9 * r) fail("physics.masses must form a geometric sequence");
        }
    }
    if (!(c.physics.k_max > c.physics.k_min)) fail("physics.k_max must exceed physics.k_min");
    if (!(c.numerics.ratio_hi > c.numerics.ratio_lo)) fail("numerics.ratio_hi must exceed numerics.ratio_lo");
    if (!(c.numerics.rk4_ratio_hi > c.numerics.rk4_ratio_lo)) {
        fail("numerics.rk4_ratio_hi must exceed numerics.rk4_ratio_lo");
    }
    if (c.numerics.order == StencilOrder::fourth && c.grid.time_points < 6) {
        fail("grid.time_points: >= 6 required for fourth-order stencils");
    }
}

}  // namespace

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::identity_suite: return "identity-suite";
        case Experiment::convergence_suite: return "convergence-suite";
        case Experiment::lambda_profile: return "lambda-profile";
        case Experiment::mass_landscape: return "mass-landscape";
        case Experiment::neutrino_limit: return "neutrino-limit";
        case Experiment::dispersion_scan: return "dispersion-scan";
        case Experiment::action_gradient: return "action-gradient";
    }
    return "?";
}

Experiment experiment_from_string(const std::string& s) {
    for (auto e : all_experiments()) {
        if (s == to_string(e)) return e;
    }
    std::string names;
    for (auto e : all_experiments()) names += std::string(names.empty() ? "" : ", ") + to_string(e);
    throw ConfigError("unknown experiment '" + s + "' (expected one of: " + names + ", all)");
}

std::vector<Experiment> all_experiments() {
    return {Experiment::action_gradient, Experiment::convergence_suite, Experiment::dispersion_scan,
            Experiment::identity_suite,  Experiment::lambda_profile,    Experiment::mass_landscape,
            Experiment::neutrino_limit};
}

SpacetimeGrid GridSpec::build(int level) const {
    const std::size_t scale = std::size_t{1} << level;
    const std::size_t nx = boundary == Boundary::periodic ? points_per_axis * scale
                                                          : (points_per_axis - 1) * scale + 1;
    const std::size_t nt = (time_points - 1) * scale + 1;
    return SpacetimeGrid({{t_lo, t_hi, nt, metric_t, Boundary::one_sided}, {x_lo, x_hi, nx, metric_x, boundary}});
}

const std::vector<KeyInfo>& config_schema() {
    static const std::vector<KeyInfo> schema = [] {
        std::vector<KeyInfo> out;
        for (const auto& d : definitions()) out.push_back(d.info);
        return out;
    }();
    return schema;
}

RunConfig parse_config(const std::string& text, const std::string& source_name,
                       const std::vector<std::string>& overrides) {
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = source_name + ":" + std::to_string(line_no);
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section)) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!find_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (auto it = entries.find(key); it != entries.end()) {
            throw ConfigError(where + ": duplicate key '" + key + "' (first set at " + it->second.origin + ")");
        }
        entries[key] = {value, where};
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set '" + o + "': expected section.key=value");
        const std::string key = trim(o.substr(0, eq));
        if (!find_key(key)) throw ConfigError("--set '" + o + "': unknown key '" + key + "'");
        entries[key] = {trim(o.substr(eq + 1)), "--set " + key};
    }

    RunConfig cfg;
    for (const auto& d : definitions()) {
        const auto it = entries.find(d.info.name);
        const std::string value = it == entries.end() ? d.info.default_value : it->second.value;
        const std::string origin = it == entries.end() ? "default" : it->second.origin;
        try {
            d.set(cfg, value);
        } catch (const BadValue& e) {
            throw ConfigError(origin + ": " + d.info.name + ": " + e.message);
        }
        cfg.echo.emplace_back(d.info.name, value);
    }
    cross_validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path, overrides);
}

}  // namespace vdlab::runner
