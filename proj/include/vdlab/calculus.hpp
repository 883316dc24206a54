#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vdlab/polar.hpp"
#include "vdlab/residual.hpp"

namespace vdlab {

enum class DerivativeMode { stencil, analytic };

const char* to_string(DerivativeMode m);

// Exact derivatives of ln(rho) and S sampled on the grid, as produced by the
// manufactured-solution factory. Second derivatives are the pure diagonal
// ones d_mu d_mu; that is all a diagonal metric needs.
struct AnalyticPack {
    std::vector<RealField> grad_log_rho;
    std::vector<RealField> second_log_rho;
    std::vector<RealField> grad_S;
    std::vector<RealField> second_S;
    std::vector<RealField> grad_qtilde;
};

/**
 * Every derivative of (rho, S, phi) that the residual evaluators consume,
 * computed once either by stencils or from an AnalyticPack. The mode is
 * recorded so reports can separate discretization error from identity error.
 *
 * In analytic mode phi's derivatives follow from the chain rule,
 * d phi = (d ln rho / 2 + i dS / hbar) phi, so nothing is differenced.
 */
class PolarCalculus {
public:
    static PolarCalculus stencil(const PolarDecomposition& p, StencilOrder order = StencilOrder::second);
    static PolarCalculus analytic(const PolarDecomposition& p, const AnalyticPack& pack,
                                  StencilOrder order = StencilOrder::second);

    DerivativeMode mode() const { return mode_; }
    // Stencil order used for anything not covered by the pack (lambda, spinors).
    StencilOrder order() const { return order_; }
    // Residual norms skip this many points next to one-sided boundaries.
    std::size_t margin() const { return 2 * stencil_radius(order_); }

    const PolarDecomposition& polar() const { return polar_; }
    const SpacetimeGrid& grid() const { return polar_.grid(); }
    double hbar() const { return polar_.hbar(); }
    double mass() const { return polar_.mass(); }

    const RealField& sqrt_rho() const { return sqrt_rho_; }
    const RealCovector& grad_sqrt_rho() const { return *grad_sqrt_rho_; }
    const RealField& box_sqrt_rho() const { return box_sqrt_rho_; }

    const RealCovector& grad_S() const { return *grad_S_; }
    const RealCovector& grad_S_up() const { return *grad_S_up_; }
    const RealField& box_S() const { return box_S_; }
    const RealField& grad_S_squared() const { return grad_S_sq_; }

    const RealField& qtilde() const { return qtilde_; }

    // False for m = 0 or when exp(Q) is not representable; the accessors
    // below then throw (NumericalError carries the overflow report).
    bool has_conformal() const { return conformal_.has_value(); }
    const ConformalState& conformal() const;
    // (hbar^2/m^2) Qtilde, available even when exp(Q) is not.
    RealField quantum_potential_Q() const;
    const RealCovector& grad_Q() const;
    // d_mu ln(Omega^2) for the conformal wave form: stencil of omega2
    // divided by omega2, or the analytic grad Q.
    const RealCovector& grad_log_omega2() const;

    const ComplexField& phi() const { return phi_; }
    const ComplexCovector& grad_phi() const { return *grad_phi_; }
    const ComplexField& box_phi() const { return box_phi_; }

private:
    explicit PolarCalculus(const PolarDecomposition& p);
    void finish_conformal_stencil();
    void require_conformal() const;

    DerivativeMode mode_ = DerivativeMode::stencil;
    StencilOrder order_ = StencilOrder::second;
    PolarDecomposition polar_;

    RealField sqrt_rho_;
    std::optional<RealCovector> grad_sqrt_rho_;
    RealField box_sqrt_rho_;
    std::optional<RealCovector> grad_S_;
    std::optional<RealCovector> grad_S_up_;
    RealField box_S_;
    RealField grad_S_sq_;
    RealField qtilde_;
    std::optional<ConformalState> conformal_;
    std::string conformal_error_;
    std::optional<RealCovector> grad_Q_;
    std::optional<RealCovector> grad_log_omega2_;
    ComplexField phi_;
    std::optional<ComplexCovector> grad_phi_;
    ComplexField box_phi_;
};

// Max-norm over the interior of (1/2)(d phi / phi - d phi* / phi*) - (i/hbar) dS,
// all components. Scale is max |dS| / hbar.
Residual phase_identity_residual(const PolarCalculus& calc);

// Stencil version for a given phi (expected to equal from_polar(p)).
Residual phase_identity_residual(const ComplexField& phi, const PolarDecomposition& p,
                                 StencilOrder order = StencilOrder::second);

}  // namespace vdlab
