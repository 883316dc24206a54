#pragma once

#include <string>
#include <vector>

#include "vdlab/calculus.hpp"

namespace vdlab::kg {

// D_mu = d_mu - (i/hbar) d_mu S (minus, the default) or d_mu + (i/hbar) d_mu S.
enum class DSign { minus, plus };

// D_mu applied to the calculus' own phi (uses its grad_phi, so analytic mode
// stays analytic).
ComplexCovector apply_D(const PolarCalculus& calc, DSign sign = DSign::minus);

// D_mu applied to an arbitrary field on the same grid; d phi by stencil.
ComplexCovector apply_D(const ComplexField& phi, const PolarCalculus& calc, DSign sign = DSign::minus);

// D_mu D^mu phi in expanded form:
//   box phi - (2i/hbar) d^mu S d_mu phi - (i/hbar)(box S) phi - (1/hbar^2)(dS.dS) phi
ComplexField box_D(const PolarCalculus& calc);
ComplexField box_D(const ComplexField& phi, const PolarCalculus& calc);

// Cross-check mode: D_mu applied to D^mu phi with first-derivative stencils
// twice (wider stencil, same order).
ComplexField box_D_nested(const ComplexField& phi, const PolarCalculus& calc);

struct ShiftReport {
    Residual box;            // Qtilde phi - D_mu D^mu phi
    Residual gradient_minus;  // (d_mu sqrt rho) e^{iS/hbar} - D_mu phi
    Residual gradient_plus;   // (D+_mu sqrt rho) e^{iS/hbar} - d_mu phi
};

// Density route against wavefunction route for f = box (the headline
// residual) and f = d_mu with both D signs.
ShiftReport shift_residual(const PolarCalculus& calc);

struct PolarResidual {
    RealField motion;       // dS.dS - m^2 Omega^2 + lambda term
    RealField continuity;   // d_mu(rho Omega^2 d^mu S)
    Residual motion_norm;
    Residual continuity_norm;
    bool has_lambda = false;
};

// Real and imaginary parts of the generalized Klein-Gordon equation in polar
// form, with or without the vacuum field.
PolarResidual kg_residual_polar(const PolarCalculus& calc);
PolarResidual kg_residual_polar(const PolarCalculus& calc, const RealField& lambda);

struct WaveResidual {
    ComplexField quantum_force_form;  // box phi + (i/hbar)(dQ.dS) phi + (m^2/hbar^2) phi
    ComplexField conformal_form;      // same with (1/2)(d Omega^2/Omega^2)(d phi/phi - d phi*/phi*)
    Residual norm;                    // of quantum_force_form
    Residual conformal_norm;
    double form_gap = 0.0;            // max |quantum_force_form - conformal_form|
    double dissipative = 0.0;         // max |(1/hbar)(dQ.dS) phi|
    double real_part = 0.0;           // max |Re quantum_force_form|
    double imag_part = 0.0;           // max |Im quantum_force_form|
};

WaveResidual kg_residual_wave(const PolarCalculus& calc);

struct CompactFormReport {
    double wave_norm = 0.0;   // max |quantum force form|
    double box_d_norm = 0.0;  // max |D_mu D^mu phi|
    double difference = 0.0;  // max |quantum force form - D_mu D^mu phi|
    // Same difference after removing the exact continuity and mass-shell
    // defects; vanishes for any fields.
    Residual corrected;
};

// Compact-form comparison: the two forms coincide once dS.dS = m^2 and the
// continuity equation hold.
CompactFormReport compact_form_check(const PolarCalculus& calc);

struct GeneralKgResidual {
    ComplexField field;  // D_mu D^mu phi - B phi
    RealField bracket;   // B = (box lambda - 2 m^2 (1 - Q) lambda / hbar^2) / (2 m Omega^2 rho)
    Residual norm;
};

GeneralKgResidual general_kg_residual(const PolarCalculus& calc, const RealField& lambda);

struct ActionParams {
    double kappa = 1.0;
    double hbar = 1.0;
    double mass = 1.0;
    double ricci_scalar = 0.0;
};

// Discretized action: sum over the grid of sqrt(-g) w_i [ (1/2kappa)(R Omega^2
// - 6 dOmega.dOmega) + (rho/m) Omega^2 dS.dS - m rho Omega^4
// + lambda (ln Omega^2 - (hbar^2/m^2) box sqrt(rho)/sqrt(rho)) ], with
// trapezoid weights w_i. Omega is treated as an independent field.
double action_value(const PolarDecomposition& p, const ConformalState& c, const RealField& lambda,
                    const ActionParams& a, StencilOrder order = StencilOrder::second);

// Euler-Lagrange fields of the discrete action, per unit weight.
struct EulerLagrangeFields {
    RealField S;
    RealField rho;
    RealField lambda;
};

EulerLagrangeFields euler_lagrange(const PolarDecomposition& p, const ConformalState& c, const RealField& lambda,
                                   const ActionParams& a, StencilOrder order = StencilOrder::second);

struct GradientComparison {
    std::string field;
    RealField finite_difference;
    RealField euler_lagrange;
    double max_fd = 0.0;
    double max_el = 0.0;
    double max_deviation = 0.0;
    double relative_deviation = 0.0;
    double correlation = 0.0;
};

struct ActionGradientReport {
    std::vector<GradientComparison> fields;  // S, rho, lambda
    double epsilon = 0.0;
    std::size_t perturbed_points = 0;

    double worst_relative() const;
    double worst_max_fd() const;
};

// Central finite differences of action_value with respect to each interior
// sample of S, rho and lambda, compared against euler_lagrange().
ActionGradientReport action_gradient_check(const PolarDecomposition& p, const ConformalState& c,
                                           const RealField& lambda, const ActionParams& a,
                                           double epsilon = 1e-6, StencilOrder order = StencilOrder::second);

}  // namespace vdlab::kg
