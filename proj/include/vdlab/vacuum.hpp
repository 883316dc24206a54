#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vdlab/calculus.hpp"

namespace vdlab::vacuum {

struct SingularityThresholds {
    double delta_u = 1e-6;  // |d_x sqrt(rho) / sqrt(rho)|
    double delta_Q = 1e-6;  // |1 - Q|
};

struct VacuumSource {
    double mass = 1.0;
    double hbar = 1.0;
    double lambda0 = 1.0;  // anchor value lambda(x0)
    double x0 = 1.0;
};

/// Vacuum field lambda on a grid, valid on the points of its solve domain.
struct VacuumField {
    RealField lambda;
    VacuumSource source;
    std::vector<std::uint8_t> valid;  // 1 inside the declared domain
    double domain_lo = 0.0;
    double domain_hi = 0.0;

    explicit VacuumField(RealField l, VacuumSource s = {});
    std::size_t valid_count() const;
};

/**
 * ln rho(x) for a static one-dimensional density with closed-form
 * derivatives up to third order.
 */
struct LogDensityProfile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    std::function<double(double)> d3;

    // rho = exp(-x^2 / sigma^2), i.e. sqrt(rho) = exp(-x^2 / 2 sigma^2)
    static LogDensityProfile gaussian(double sigma);

    // Static polar fields on a 1+1 grid (S = 0) and their exact derivatives.
    PolarDecomposition polar(const SpacetimeGrid& g, double hbar, double mass) const;
    AnalyticPack pack(const SpacetimeGrid& g) const;
};

/**
 * The static one-dimensional form of the vacuum constraint,
 *
 *   lambda' = lambda [s_x (m^2/hbar^2)(1 - Q) - u'] / u,
 *
 * with u = d_x sqrt(rho)/sqrt(rho) = l'/2, Q = (hbar^2/m^2) s_x (u' + u^2) and
 * s_x = 1/g_xx.
 */
class StaticLambdaOde {
public:
    StaticLambdaOde(LogDensityProfile profile, double mass, double hbar, double s_x = -1.0);

    double u(double x) const;
    double Q(double x) const;
    double rhs(double x, double lambda) const;

    // Classical RK4 from (x_from, lambda_from) to x_to in `steps` equal steps.
    double integrate(double x_from, double lambda_from, double x_to, std::size_t steps) const;

    // Points in [lo, hi] where u or 1 - Q vanishes or comes within the
    // thresholds, located on a mesh of `samples` intervals.
    std::vector<double> singular_points(double lo, double hi, const SingularityThresholds& t,
                                        std::size_t samples = 4096) const;

    const LogDensityProfile& profile() const { return profile_; }
    double mass() const { return mass_; }
    double hbar() const { return hbar_; }

private:
    LogDensityProfile profile_;
    double mass_;
    double hbar_;
    double s_x_;
};

// Closed-form lambda for the Gaussian profile, normalized to lambda(x0) = lambda0:
// lambda = C x^(sigma^2 m^2 / hbar^2 - 2) exp(x^2 / 2 sigma^2), x > 0.
double gaussian_lambda_exact(double x, double sigma, double mass, double hbar, double x0, double lambda0);

struct StaticSolveOptions {
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    std::size_t steps_per_cell = 8;
    SingularityThresholds thresholds;
};

// Integrates the static constraint from (x0, lambda0) and samples lambda at
// every grid point whose spatial coordinate lies in the domain. Throws
// SingularDomain naming the crossing when u or 1 - Q vanishes inside.
VacuumField solve_lambda_static_1d(const SpacetimeGrid& grid, const LogDensityProfile& profile,
                                   const VacuumSource& source, const StaticSolveOptions& options);

// Max-norm of lambda - (hbar^2 / (m^2 (1 - Q))) d_mu(lambda u^mu) at valid
// points whose stencil stays inside the valid region.
Residual lambda_residual(const VacuumField& v, const PolarCalculus& calc,
                         const SingularityThresholds& t = {});

enum class Branch { plus, minus };

const char* to_string(Branch b);

struct VacuumMass {
    RealField m2_closed;     // m(1-Q) lambda / rho - (hbar^2 / 2 m rho) box lambda
    RealField m2_conformal;  // [m(1-Q) lambda - (hbar^2 / 2m) box lambda] / (Omega^2 rho), NaN without Omega^2 unless lambda = 0
    RealField discrepancy;   // m2_closed - m2_conformal
    RealField m2;            // the selected form
    ComplexField M;          // branch sqrt(m2), or i sqrt(|m2|) where m2 < 0
    std::vector<std::uint8_t> complex_flag;
    std::vector<std::uint8_t> valid;
    bool include_conformal = true;
    Branch branch = Branch::plus;
    bool conformal_available = true;

    std::size_t complex_count() const;
};

// Both forms are evaluated wherever the stencil sees only valid lambda
// samples. With include_conformal = false the closed form is selected and
// Omega^2 is optional (it may not be representable as m -> 0).
VacuumMass vacuum_mass(const PolarCalculus& calc, const VacuumField& v, bool include_conformal,
                       Branch branch = Branch::plus);

// D_mu D^mu phi + (M^2/hbar^2) phi with the selected vacuum mass.
ComplexField vacuum_mass_kg_field(const PolarCalculus& calc, const VacuumMass& vm);

struct ConstancyReport {
    double max_gradient = 0.0;  // max |d_mu sqrt(m2)| over the real sub-domain
    std::size_t evaluated_points = 0;
    std::size_t complex_points = 0;
    bool restricted = false;    // complex points were excluded
};

ConstancyReport mass_constancy_residual(const VacuumMass& vm, StencilOrder order = StencilOrder::second);

// ---- m -> 0 study ---------------------------------------------------------

enum class LambdaProtocol { zero, fixed, resolved };

const char* to_string(LambdaProtocol p);
LambdaProtocol protocol_from_string(const std::string& s);

enum class LimitStatus { constant, converging, diverging, undetermined, insufficient };

const char* to_string(LimitStatus s);

struct NeutrinoStudyConfig {
    LogDensityProfile profile = LogDensityProfile::gaussian(1.0);
    std::size_t points = 201;  // along x over [solve.domain_lo, solve.domain_hi]
    double hbar = 1.0;
    double lambda0 = 1.0;
    double x0 = 1.5;
    std::vector<double> masses;  // geometric, strictly decreasing
    std::vector<double> probes;  // spatial coordinates
    LambdaProtocol protocol = LambdaProtocol::resolved;
    bool include_conformal = true;
    Branch branch = Branch::plus;
    StaticSolveOptions solve;
    StencilOrder order = StencilOrder::second;
    double zero_tolerance = 1e-12;
};

struct NeutrinoRow {
    double mass = 0.0;
    bool failed = false;
    std::string error;
    std::vector<double> m2;       // per probe
    std::vector<cplx> M;          // per probe
};

struct LimitEstimate {
    double probe = 0.0;
    LimitStatus status = LimitStatus::insufficient;
    double order = 0.0;        // estimated exponent p in M ~ L + C m^p
    double limit = 0.0;
    double uncertainty = 0.0;
    bool consistent_with_zero = false;
    bool monotone = false;
};

struct NeutrinoReport {
    double ratio = 0.0;  // m_{k+1} / m_k
    std::vector<NeutrinoRow> rows;
    std::vector<LimitEstimate> limits;
};

// Static 1+1 grid used by the study: 5 time samples, x one-sided over the domain.
SpacetimeGrid study_grid(const NeutrinoStudyConfig& cfg);

// Re-solves (or holds) lambda for every mass, evaluates M at the probes and
// extrapolates each probe to m -> 0 from the last three successful rows.
NeutrinoReport neutrino_limit_study(const NeutrinoStudyConfig& cfg);

// Richardson-style limit of y(m) = L + C m^p from three values at
// geometric masses m, r m, r^2 m. Exposed for tests.
LimitEstimate extrapolate_limit(const std::vector<double>& y, double ratio, double zero_tolerance);

}  // namespace vdlab::vacuum
