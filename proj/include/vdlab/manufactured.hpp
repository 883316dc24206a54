#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdlab/calculus.hpp"

namespace vdlab {

/**
 * Smooth closed-form scalar used for manufactured solutions:
 *
 *   f(x) = c + sum_a b_a x_a + sum_a q_a x_a^2 + sum_k A_k cos(k . x + phase_k)
 *
 * Any mixed partial derivative is available in closed form.
 */
class SmoothField {
public:
    struct Mode {
        double amplitude = 0.0;
        std::vector<double> wavevector;
        double phase = 0.0;
    };

    explicit SmoothField(std::size_t dim);

    double constant = 0.0;
    std::vector<double> linear;
    std::vector<double> quadratic;
    std::vector<Mode> modes;

    std::size_t dim() const { return linear.size(); }

    double value(std::span<const double> x) const;
    // orders[a] = number of derivatives along axis a.
    double derivative(std::span<const double> x, std::span<const int> orders) const;

    RealField sample(const SpacetimeGrid& g) const;
    RealField sample_derivative(const SpacetimeGrid& g, std::span<const int> orders) const;
};

struct ManufacturedFields {
    PolarDecomposition polar;
    AnalyticPack pack;
    SmoothField log_rho;
    SmoothField S;
};

// Deterministic in (seed, grid, smoothness). ln rho and S are sums of random
// Fourier modes with mode index up to `smoothness` on every axis (periodic
// axes get commensurate wavenumbers); S also carries a linear time part and,
// on periodic axes, a winding of -1, 0 or +1. smoothness = 0 gives constant
// fields.
ManufacturedFields generate_manufactured_fields(std::uint64_t seed, const SpacetimeGrid& grid, int smoothness,
                                                double hbar = 1.0, double mass = 1.0);

// Constant density rho0 and S = E t - sum_a p_a x_a on the mass shell
// dS.dS = m^2. `momentum` lists p_a for every non-time axis in order. On
// periodic axes p_a must fit a whole number of windings.
ManufacturedFields plane_wave_fields(const SpacetimeGrid& grid, std::span<const double> momentum, double hbar,
                                     double mass, double rho0 = 1.0);

// Plane-wave S with ln rho = amplitude cos(k (x - (p/E) t)) on the first
// spatial axis, i.e. rho depends on E x - p t only. Then dS.dS = m^2 and
// d_mu(rho Omega^2 d^mu S) = 0 hold exactly while Q varies.
ManufacturedFields travelling_profile_fields(const SpacetimeGrid& grid, double momentum, int mode, double amplitude,
                                             double hbar, double mass);

// Exact derivatives for given closed-form ln rho and S.
AnalyticPack analytic_pack(const SpacetimeGrid& g, const SmoothField& log_rho, const SmoothField& S);

}  // namespace vdlab
