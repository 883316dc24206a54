#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vdlab/calculus.hpp"
#include "vdlab/vacuum.hpp"

namespace vdlab::dirac {

using Matrix = Eigen::MatrixXcd;
using Spinor = Eigen::VectorXcd;

enum class Dim { two = 2, four = 4 };

/**
 * Gamma matrices gamma^mu with {gamma^mu, gamma^nu} = 2 g^{mu nu} I.
 *
 * 1+1: gamma^0 = diag(1, -1), gamma^1 = [[0, 1], [-1, 0]].
 * 3+1: Dirac representation, gamma^0 = diag(I, -I), gamma^k = [[0, s_k], [-s_k, 0]].
 * The Clifford relation and the hermiticity pattern are checked on
 * construction.
 */
class GammaRepresentation {
public:
    explicit GammaRepresentation(Dim dim);

    // Matrices adapted to a grid with a constant diagonal metric: the
    // standard set rescaled by sqrt(|g^mumu|), ordered like the grid axes.
    static GammaRepresentation for_grid(const SpacetimeGrid& g);

    std::size_t size() const { return static_cast<std::size_t>(gamma_.front().rows()); }
    std::size_t count() const { return gamma_.size(); }
    const Matrix& operator[](std::size_t mu) const { return gamma_[mu]; }
    const std::vector<double>& inverse_metric() const { return inverse_metric_; }
    std::size_t time_index() const { return time_; }
    // gamma^t, the matrix used in psi-bar = psi^dagger gamma^0.
    const Matrix& gamma0() const { return gamma_[time_]; }

    // max |{gamma^mu, gamma^nu} - 2 g^{mu nu} I| over all pairs.
    double clifford_defect() const;
    // max |gamma^0 (gamma^mu)^dagger gamma^0 - g^00 gamma^mu|, the
    // hermiticity pattern in a form that survives rescaling.
    double hermiticity_defect() const;

    // gamma^mu a_mu for covariant components a.
    Matrix slash(const std::vector<double>& a) const;
    // a_mu a^mu.
    double square(const std::vector<double>& a) const;

private:
    GammaRepresentation(std::vector<Matrix> gamma, std::vector<double> inverse_metric, std::size_t time);
    void verify() const;

    std::vector<Matrix> gamma_;
    std::vector<double> inverse_metric_;
    std::size_t time_ = 0;
};

GammaRepresentation build_gamma(Dim dim);

/// Spinor samples on a grid, one complex field per component.
class SpinorField {
public:
    SpinorField(GammaRepresentation rep, std::vector<ComplexField> components);
    SpinorField(const SpacetimeGrid& g, GammaRepresentation rep);

    const SpacetimeGrid& grid() const { return components_.front().grid(); }
    const GammaRepresentation& rep() const { return rep_; }
    std::size_t components() const { return components_.size(); }
    const ComplexField& operator[](std::size_t a) const { return components_[a]; }
    ComplexField& operator[](std::size_t a) { return components_[a]; }

    Spinor at(std::size_t i) const;
    void set(std::size_t i, const Spinor& v);

    // Same spinor multiplied pointwise by a scalar field.
    SpinorField times(const ComplexField& f) const;

private:
    GammaRepresentation rep_;
    std::vector<ComplexField> components_;
};

// Two-component spinor phi (1 + 0.3 e1, (0.5 + 0.2 i sin e2)) with smooth
// envelopes e1, e2 from the manufactured-field factory. 1+1 grids only.
SpinorField manufactured_spinor(const PolarDecomposition& p, std::uint64_t seed, int smoothness = 2);

// Psi = f u for a constant spinor u.
SpinorField constant_spinor_times(const ComplexField& f, const Spinor& u, const GammaRepresentation& rep);

enum class ParticleSign { particle, antiparticle };  // -m or +m in the operator
enum class VacuumSign { plus, minus };                // -M or +M in the operator

struct DiracVariant {
    ParticleSign particle = ParticleSign::particle;
    VacuumSign vacuum = VacuumSign::plus;

    double particle_factor() const { return particle == ParticleSign::particle ? 1.0 : -1.0; }
    double vacuum_factor() const { return vacuum == VacuumSign::plus ? 1.0 : -1.0; }
};

const char* to_string(ParticleSign s);
const char* to_string(VacuumSign s);
std::vector<DiracVariant> all_variants();

enum class DiracMode { d_form, expanded, assigned };

const char* to_string(DiracMode m);

struct DiracOptions {
    DiracMode mode = DiracMode::assigned;
    DiracVariant variant{};
    // Accept complex M (diagnostic runs); otherwise a complex sample throws.
    bool allow_complex_mass = false;
};

struct DiracResidual {
    SpinorField psi_row;  // operator applied to psi
    SpinorField bar_row;  // adjoint operator applied to psi-bar, stored as a column
    Residual psi_norm;
    Residual bar_norm;
};

/**
 * Left-hand sides of the vacuum-corrected Dirac equation, with
 * mu = s_p m + s_v M:
 *
 *   d_form:    i hbar gamma^mu D_mu psi - s_v M psi
 *   expanded:  i hbar gamma^mu d_mu psi + gamma^mu (d_mu S) psi - s_v M psi
 *   assigned:  i hbar gamma^mu d_mu psi - mu psi
 *
 * The adjoint row acts on psi-bar = psi^dagger gamma^0 with D+:
 * i hbar (D+_mu psi-bar) gamma^mu + s_v M psi-bar, and in assigned mode
 * i hbar (d_mu psi-bar) gamma^mu + mu psi-bar. Psi derivatives are
 * stencils of calc's order; S enters through calc. vm absent means M = 0.
 * Norms skip calc.margin() points next to one-sided boundaries.
 */
DiracResidual dirac_residual(const SpinorField& psi, const PolarCalculus& calc,
                             const vacuum::VacuumMass* vm, const DiracOptions& opts);

// (gamma^mu d_mu S + s_p m) psi: what the assignment rule removes.
SpinorField assignment_difference(const SpinorField& psi, const PolarCalculus& calc, DiracVariant variant);

// i hbar gamma^mu D_mu psi, derivatives by stencil.
SpinorField gamma_D(const SpinorField& psi, const PolarCalculus& calc);

// Squaring check, D_mu D^mu applied componentwise with the scalar operator.
Residual square_dirac_check(const SpinorField& psi, const PolarCalculus& calc);

struct EikonalReport {
    double clifford = 0.0;    // max |(gamma.dS)^2 - (dS.dS) I|
    Residual mass_shell;      // dS.dS - m^2 Omega^2
};

EikonalReport eikonal_identity_check(const PolarCalculus& calc);

struct DensityResult {
    RealField rho;
    std::size_t negative_points = 0;  // indefinite psi-bar psi samples
    double max_imag = 0.0;
};

// psi^dagger gamma^0 psi; throws NumericalError when the imaginary part
// exceeds tolerance * max |psi|^2.
DensityResult spinor_density(const SpinorField& psi, double tolerance = 1e-12);

// gamma^0 (gamma^1 k + m_total), the 1+1 momentum-space Hamiltonian.
Matrix momentum_hamiltonian(double k, double total_mass);

// (gamma^t)^-1 (gamma^j k^j + m_total) for a momentum with contravariant
// components k^j, one per spatial gamma of rep.
Matrix momentum_hamiltonian(const std::vector<double>& k, double total_mass, const GammaRepresentation& rep);

struct DispersionPoint {
    double k = 0.0;
    double numeric = 0.0;  // largest eigenvalue of the Hamiltonian
    double closed = 0.0;   // sqrt(k^2 + (m + M)^2)
    double abs_error = 0.0;
};

DispersionPoint plane_wave_dispersion(double k, double mass, double vacuum_mass);

// Positive-energy eigenvector of momentum_hamiltonian(k, m_total), unit norm.
Spinor positive_energy_spinor(double k, double total_mass);

// psi = u exp(-i (E t - k x) / hbar) with E > 0 from the Hamiltonian
// (on the first spatial axis of a 1+1 grid). Solves the assigned particle
// equation with M = 0 when total_mass = m. The grid's x axis must hold
// a whole number of wavelengths if periodic.
SpinorField free_plane_wave(const SpacetimeGrid& g, double k, double total_mass, double hbar);

}  // namespace vdlab::dirac
