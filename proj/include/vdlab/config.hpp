#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vdlab/grid.hpp"
#include "vdlab/vacuum.hpp"

namespace vdlab::runner {

enum class Experiment {
    identity_suite,
    convergence_suite,
    lambda_profile,
    mass_landscape,
    neutrino_limit,
    dispersion_scan,
    action_gradient,
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);
// In name order, which is also the merge order of multi-experiment reports.
std::vector<Experiment> all_experiments();

struct GridSpec {
    std::size_t points_per_axis = 32;  // spatial samples at the base level
    std::size_t time_points = 33;
    double t_lo = 0.0;
    double t_hi = 1.0;
    double x_lo = 0.0;
    double x_hi = 6.283185307179586;
    double metric_t = 1.0;
    double metric_x = -1.0;
    Boundary boundary = Boundary::periodic;

    SpacetimeGrid build(int level = 0) const;
};

struct PhysicsSpec {
    double mass = 1.0;
    double hbar = 1.0;
    double kappa = 1.0;
    double sigma = 1.0;
    double lambda0 = 1.0;
    double x0 = 1.5;
    double domain_lo = 1.2;
    double domain_hi = 3.0;
    std::vector<double> masses{0.8, 0.4, 0.2, 0.1};
    std::vector<double> probes{1.6, 2.2};
    vacuum::LambdaProtocol protocol = vacuum::LambdaProtocol::resolved;
    bool include_conformal = true;
    vacuum::Branch branch = vacuum::Branch::plus;
    double momentum = 2.0;
    double vacuum_mass = 0.5;
    double k_min = -5.0;
    double k_max = 5.0;
    std::size_t k_points = 50;
};

struct NumericsSpec {
    StencilOrder order = StencilOrder::second;
    std::string derivative_mode = "stencil";
    int smoothness = 2;
    std::size_t corpus_size = 10;
    double delta_u = 1e-6;
    double delta_Q = 1e-6;
    double rho_floor = 1e-12;
    double gradient_epsilon = 1e-6;
    std::size_t steps_per_cell = 8;
    std::size_t lambda_points = 181;
    double tol_analytic = 1e-10;
    double tol_plane_wave = 1e-8;
    double tol_identity = 1e-12;
    double tol_gradient = 1e-3;
    double tol_stationary = 1e-6;
    double tol_closure = 1e-8;
    double tol_lambda = 1e-8;
    double tol_dispersion = 1e-12;
    double ratio_lo = 3.5;
    double ratio_hi = 4.5;
    double rk4_ratio_lo = 12.0;
    double rk4_ratio_hi = 20.0;
};

struct RunConfig {
    Experiment experiment = Experiment::identity_suite;
    bool all = false;  // run every experiment
    std::uint64_t seed = 1;
    int refine_levels = 3;
    GridSpec grid;
    PhysicsSpec physics;
    NumericsSpec numerics;
    std::string output_dir = "vdlab-out";
    // Every known key with its effective value, in schema order.
    std::vector<std::pair<std::string, std::string>> echo;
};

/**
 * Flat sectioned key = value text:
 *
 *   # comment
 *   [physics]
 *   mass = 1.2      # trailing comments allowed
 *
 * Sections: run, grid, physics, numerics, output. Keys are validated against
 * the schema; unknown sections or keys, duplicates and bad values raise
 * ConfigError naming the source line. Overrides are "section.key=value"
 * strings applied after the file.
 */
RunConfig parse_config(const std::string& text, const std::string& source_name,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

struct KeyInfo {
    std::string name;  // section.key
    std::string default_value;
    std::string help;
};

// The schema, for documentation and the validate subcommand.
const std::vector<KeyInfo>& config_schema();

}  // namespace vdlab::runner
