#pragma once

#include <vector>

#include "vdlab/field.hpp"
#include "vdlab/operators.hpp"

namespace vdlab {

inline constexpr double kDefaultRhoFloor = 1e-12;

/**
 * Bohmian polar representation phi = sqrt(rho) exp(i S / hbar).
 *
 * S is stored unwrapped. On a periodic axis with nonzero winding number w,
 * S(x + L) = S(x) + 2 pi hbar w; the winding is kept so stencils can account
 * for the seam.
 */
class PolarDecomposition {
public:
    PolarDecomposition(RealField rho, RealField S, double hbar, double mass,
                       std::vector<int> winding = {}, double rho_floor = kDefaultRhoFloor);

    const SpacetimeGrid& grid() const { return rho_.grid(); }
    const RealField& rho() const { return rho_; }
    const RealField& S() const { return S_; }
    double hbar() const { return hbar_; }
    double mass() const { return mass_; }
    double rho_floor() const { return rho_floor_; }
    const std::vector<int>& winding() const { return winding_; }

    // 2 pi hbar w per axis, zero on one-sided axes.
    std::vector<double> seam_jumps() const;

    PolarDecomposition with_rho(RealField rho) const;
    PolarDecomposition with_S(RealField S) const;
    PolarDecomposition with_mass(double mass) const;

private:
    RealField rho_;
    RealField S_;
    double hbar_;
    double mass_;
    std::vector<int> winding_;
    double rho_floor_;
};

ComplexField from_polar(const PolarDecomposition& p);

// Inverse of from_polar. Phase unwrapping sweeps the grid in storage order:
// each point continues from its predecessor along the fastest axis that has
// one, taking the nearest multiple of 2 pi. The winding number of every
// periodic axis is measured along the line through the origin. Throws when
// |phi|^2 drops below the density floor (a node).
PolarDecomposition to_polar(const ComplexField& phi, double hbar, double mass,
                            double rho_floor = kDefaultRhoFloor);

struct ConformalState {
    RealField qtilde;  // box sqrt(rho) / sqrt(rho)
    RealField Q;       // (hbar^2 / m^2) qtilde, dimensionless
    RealField omega2;  // exp(Q)
};

// Requires mass > 0. Throws if exp(Q) would overflow or underflow to 0.
ConformalState quantum_potential(const PolarDecomposition& p, StencilOrder order = StencilOrder::second);

// Qtilde alone, defined for any mass.
RealField qtilde(const PolarDecomposition& p, StencilOrder order = StencilOrder::second);

// u^mu = d^mu sqrt(rho) / sqrt(rho), contravariant.
RealCovector drift_velocity(const PolarDecomposition& p, StencilOrder order = StencilOrder::second);

// Builds the conformal state from a given Q; omega2 = exp(Q).
ConformalState conformal_from_Q(RealField qtilde, RealField Q);

}  // namespace vdlab
