#include "vdlab/dirac.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vdlab/kgops.hpp"
#include "vdlab/manufactured.hpp"

namespace vdlab::dirac {
namespace {

constexpr cplx kI(0.0, 1.0);

Matrix pauli(int k) {
    Matrix s = Matrix::Zero(2, 2);
    if (k == 1) {
        s(0, 1) = 1.0;
        s(1, 0) = 1.0;
    } else if (k == 2) {
        s(0, 1) = -kI;
        s(1, 0) = kI;
    } else {
        s(0, 0) = 1.0;
        s(1, 1) = -1.0;
    }
    return s;
}

std::vector<Matrix> standard_set(Dim dim) {
    std::vector<Matrix> out;
    if (dim == Dim::two) {
        Matrix g0 = Matrix::Zero(2, 2);
        g0(0, 0) = 1.0;
        g0(1, 1) = -1.0;
        Matrix g1 = Matrix::Zero(2, 2);
        g1(0, 1) = 1.0;
        g1(1, 0) = -1.0;
        out = {g0, g1};
    } else {
        Matrix g0 = Matrix::Zero(4, 4);
        g0.topLeftCorner(2, 2) = Matrix::Identity(2, 2);
        g0.bottomRightCorner(2, 2) = -Matrix::Identity(2, 2);
        out.push_back(g0);
        for (int k = 1; k <= 3; ++k) {
            Matrix gk = Matrix::Zero(4, 4);
            gk.topRightCorner(2, 2) = pauli(k);
            gk.bottomLeftCorner(2, 2) = -pauli(k);
            out.push_back(gk);
        }
    }
    return out;
}

std::vector<double> minkowski(std::size_t n) {
    std::vector<double> eta(n, -1.0);
    eta[0] = 1.0;
    return eta;
}

// grad[mu][a] = d_mu psi_a
std::vector<std::vector<ComplexField>> spinor_gradient(const SpinorField& psi, StencilOrder order) {
    std::vector<std::vector<ComplexField>> out(psi.grid().dim());
    for (std::size_t mu = 0; mu < out.size(); ++mu) {
        for (std::size_t a = 0; a < psi.components(); ++a) out[mu].push_back(partial(psi[a], mu, order));
    }
    return out;
}

Spinor gather(const std::vector<ComplexField>& comps, std::size_t i) {
    Spinor v(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t a = 0; a < comps.size(); ++a) v(static_cast<Eigen::Index>(a)) = comps[a][i];
    return v;
}

void require_compatible(const SpinorField& psi, const PolarCalculus& calc, const char* what) {
    if (!(psi.grid() == calc.grid())) throw InvalidArgument(std::string(what) + ": grid mismatch");
    if (psi.rep().count() != calc.grid().dim()) {
        throw InvalidArgument(std::string(what) + ": gamma set does not match grid dimension");
    }
}

bool evaluated(const SpacetimeGrid& g, std::size_t i, std::size_t margin, const vacuum::VacuumMass* vm) {
    if (!g.interior(i, margin)) return false;
    return vm == nullptr || vm->valid[i];
}

void accumulate(Residual& r, const Spinor& v, double scale) {
    r.abs = std::max(r.abs, v.cwiseAbs().maxCoeff());
    r.scale = std::max(r.scale, scale);
}

}  // namespace

GammaRepresentation::GammaRepresentation(Dim dim)
    : GammaRepresentation(standard_set(dim), minkowski(static_cast<std::size_t>(dim)), 0) {}

GammaRepresentation::GammaRepresentation(std::vector<Matrix> gamma, std::vector<double> inverse_metric,
                                         std::size_t time)
    : gamma_(std::move(gamma)), inverse_metric_(std::move(inverse_metric)), time_(time) {
    verify();
}

GammaRepresentation GammaRepresentation::for_grid(const SpacetimeGrid& g) {
    if (g.dim() != 2 && g.dim() != 4) throw InvalidArgument("spinors need a 1+1 or 3+1 grid");
    const auto base = standard_set(g.dim() == 2 ? Dim::two : Dim::four);
    std::vector<Matrix> gamma(g.dim());
    std::vector<double> ginv(g.dim());
    std::size_t spatial = 1;
    for (std::size_t a = 0; a < g.dim(); ++a) {
        ginv[a] = g.inverse_metric(a);
        const Matrix& m = a == g.time_axis() ? base[0] : base[spatial++];
        gamma[a] = std::sqrt(std::abs(ginv[a])) * m;
    }
    return GammaRepresentation(std::move(gamma), std::move(ginv), g.time_axis());
}

void GammaRepresentation::verify() const {
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, *std::max_element(inverse_metric_.begin(), inverse_metric_.end(),
                                                       [](double a, double b) { return std::abs(a) < std::abs(b); }));
    if (clifford_defect() > std::abs(tol)) throw NumericalError("gamma matrices violate the Clifford relation");
    if (hermiticity_defect() > std::abs(tol)) throw NumericalError("gamma matrices violate the hermiticity pattern");
}

double GammaRepresentation::clifford_defect() const {
    const auto n = static_cast<Eigen::Index>(size());
    double worst = 0.0;
    for (std::size_t mu = 0; mu < count(); ++mu) {
        for (std::size_t nu = 0; nu < count(); ++nu) {
            Matrix ac = gamma_[mu] * gamma_[nu] + gamma_[nu] * gamma_[mu];
            if (mu == nu) ac -= 2.0 * inverse_metric_[mu] * Matrix::Identity(n, n);
            worst = std::max(worst, ac.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

double GammaRepresentation::hermiticity_defect() const {
    // With (gamma^0)^2 = g^00 I the pattern reads gamma^0 gamma^mu^dagger gamma^0 = g^00 gamma^mu.
    const Matrix& g0 = gamma0();
    const double g00 = inverse_metric_[time_];
    double worst = 0.0;
    for (const auto& g : gamma_) {
        worst = std::max(worst, (g0 * g.adjoint() * g0 - g00 * g).cwiseAbs().maxCoeff());
    }
    return worst;
}

Matrix GammaRepresentation::slash(const std::vector<double>& a) const {
    if (a.size() != count()) throw InvalidArgument("covector length does not match gamma set");
    const auto n = static_cast<Eigen::Index>(size());
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t mu = 0; mu < count(); ++mu) out += a[mu] * gamma_[mu];
    return out;
}

double GammaRepresentation::square(const std::vector<double>& a) const {
    if (a.size() != count()) throw InvalidArgument("covector length does not match gamma set");
    double s = 0.0;
    for (std::size_t mu = 0; mu < count(); ++mu) s += inverse_metric_[mu] * a[mu] * a[mu];
    return s;
}

GammaRepresentation build_gamma(Dim dim) { return GammaRepresentation(dim); }

SpinorField::SpinorField(GammaRepresentation rep, std::vector<ComplexField> components)
    : rep_(std::move(rep)), components_(std::move(components)) {
    if (components_.size() != rep_.size()) {
        throw InvalidArgument("spinor has " + std::to_string(components_.size()) + " components, gamma set needs " +
                              std::to_string(rep_.size()));
    }
    for (const auto& c : components_) {
        c.check_same_grid(components_.front());
        require_finite(c, "spinor component");
    }
}

SpinorField::SpinorField(const SpacetimeGrid& g, GammaRepresentation rep)
    : SpinorField(rep, std::vector<ComplexField>(rep.size(), ComplexField(g))) {}

Spinor SpinorField::at(std::size_t i) const { return gather(components_, i); }

void SpinorField::set(std::size_t i, const Spinor& v) {
    for (std::size_t a = 0; a < components_.size(); ++a) components_[a][i] = v(static_cast<Eigen::Index>(a));
}

SpinorField SpinorField::times(const ComplexField& f) const {
    std::vector<ComplexField> c;
    for (const auto& comp : components_) c.push_back(zip(comp, f, [](cplx a, cplx b) { return a * b; }));
    return SpinorField(rep_, std::move(c));
}

SpinorField manufactured_spinor(const PolarDecomposition& p, std::uint64_t seed, int smoothness) {
    const auto& g = p.grid();
    if (g.dim() != 2) throw InvalidArgument("manufactured_spinor needs a 1+1 grid");
    const auto phi = from_polar(p);
    const auto e1 = generate_manufactured_fields(seed, g, smoothness).log_rho.sample(g);
    const auto e2 = generate_manufactured_fields(seed + 1, g, smoothness).S.sample(g);
    std::vector<ComplexField> c;
    c.push_back(zip(phi, e1, [](cplx v, double e) { return v * (1.0 + 0.3 * e); }));
    c.push_back(zip(phi, e2, [](cplx v, double e) { return v * cplx(0.5, 0.2 * std::sin(e)); }));
    return SpinorField(GammaRepresentation::for_grid(g), std::move(c));
}

SpinorField constant_spinor_times(const ComplexField& f, const Spinor& u, const GammaRepresentation& rep) {
    if (static_cast<std::size_t>(u.size()) != rep.size()) throw InvalidArgument("spinor size does not match gamma set");
    std::vector<ComplexField> c;
    for (Eigen::Index a = 0; a < u.size(); ++a) {
        const cplx ua = u(a);
        c.push_back(map(f, [ua](cplx v) { return ua * v; }));
    }
    return SpinorField(rep, std::move(c));
}

const char* to_string(ParticleSign s) { return s == ParticleSign::particle ? "particle" : "antiparticle"; }
const char* to_string(VacuumSign s) { return s == VacuumSign::plus ? "plus" : "minus"; }

std::vector<DiracVariant> all_variants() {
    return {{ParticleSign::particle, VacuumSign::plus},
            {ParticleSign::particle, VacuumSign::minus},
            {ParticleSign::antiparticle, VacuumSign::plus},
            {ParticleSign::antiparticle, VacuumSign::minus}};
}

const char* to_string(DiracMode m) {
    switch (m) {
        case DiracMode::d_form: return "d-form";
        case DiracMode::expanded: return "expanded";
        case DiracMode::assigned: return "assigned";
    }
    return "?";
}

DiracResidual dirac_residual(const SpinorField& psi, const PolarCalculus& calc, const vacuum::VacuumMass* vm,
                             const DiracOptions& opts) {
    require_compatible(psi, calc, "dirac_residual");
    const auto& g = psi.grid();
    const auto& rep = psi.rep();
    const double hbar = calc.hbar();
    const double sp = opts.variant.particle_factor();
    const double sv = opts.variant.vacuum_factor();
    const std::size_t margin = calc.margin();
    if (vm && !(vm->M.grid() == g)) throw InvalidArgument("dirac_residual: vacuum mass lives on another grid");

    // psi-bar as a column: bar_b = sum_a conj(psi_a) gamma0_ab
    std::vector<ComplexField> bar(psi.components(), ComplexField(g));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Spinor b = rep.gamma0().transpose() * psi.at(i).conjugate();
        for (std::size_t a = 0; a < bar.size(); ++a) bar[a][i] = b(static_cast<Eigen::Index>(a));
    }
    SpinorField barf(rep, bar);

    const auto dpsi = spinor_gradient(psi, calc.order());
    const auto dbar = spinor_gradient(barf, calc.order());
    const auto& dS = calc.grad_S();

    DiracResidual out{SpinorField(g, rep), SpinorField(g, rep), {}, {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx M(0.0, 0.0);
        if (vm) {
            if (!vm->valid[i]) continue;
            M = vm->M[i];
            if (vm->complex_flag[i] && !opts.allow_complex_mass && g.interior(i, margin)) {
                throw NumericalError("complex vacuum mass at " + g.format_index(i) +
                                     "; enable diagnostic mode to evaluate it");
            }
        }
        const Spinor p = psi.at(i);
        const Spinor pb = barf.at(i);
        const auto n = p.size();
        Spinor kin = Spinor::Zero(n), kin_bar = Spinor::Zero(n);
        Spinor sterm = Spinor::Zero(n), sterm_bar = Spinor::Zero(n);
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            const Matrix& gm = rep[mu];
            kin += kI * hbar * (gm * gather(dpsi[mu], i));
            kin_bar += kI * hbar * (gm.transpose() * gather(dbar[mu], i));
            sterm += dS[mu][i] * (gm * p);
            sterm_bar += dS[mu][i] * (gm.transpose() * pb);
        }
        Spinor r, rb;
        double scale = 0.0;
        switch (opts.mode) {
            case DiracMode::d_form: {
                Spinor dk = Spinor::Zero(n), dkb = Spinor::Zero(n);
                for (std::size_t mu = 0; mu < g.dim(); ++mu) {
                    const Spinor Dp = gather(dpsi[mu], i) - (kI / hbar) * dS[mu][i] * p;
                    const Spinor Dpb = gather(dbar[mu], i) + (kI / hbar) * dS[mu][i] * pb;
                    dk += kI * hbar * (rep[mu] * Dp);
                    dkb += kI * hbar * (rep[mu].transpose() * Dpb);
                }
                r = dk - sv * M * p;
                rb = dkb + sv * M * pb;
                scale = std::max({kin.cwiseAbs().maxCoeff(), sterm.cwiseAbs().maxCoeff(),
                                  std::abs(M) * p.cwiseAbs().maxCoeff()});
                break;
            }
            case DiracMode::expanded:
                r = kin + sterm - sv * M * p;
                rb = kin_bar - sterm_bar + sv * M * pb;
                scale = std::max({kin.cwiseAbs().maxCoeff(), sterm.cwiseAbs().maxCoeff(),
                                  std::abs(M) * p.cwiseAbs().maxCoeff()});
                break;
            case DiracMode::assigned: {
                const cplx mu_tot = sp * calc.mass() + sv * M;
                r = kin - mu_tot * p;
                rb = kin_bar + mu_tot * pb;
                scale = std::max(kin.cwiseAbs().maxCoeff(), std::abs(mu_tot) * p.cwiseAbs().maxCoeff());
                break;
            }
        }
        out.psi_row.set(i, r);
        out.bar_row.set(i, rb);
        if (evaluated(g, i, margin, vm)) {
            accumulate(out.psi_norm, r, scale);
            accumulate(out.bar_norm, rb, scale);
        }
    }
    return out;
}

SpinorField assignment_difference(const SpinorField& psi, const PolarCalculus& calc, DiracVariant variant) {
    require_compatible(psi, calc, "assignment_difference");
    const auto& g = psi.grid();
    const auto& rep = psi.rep();
    SpinorField out(g, rep);
    std::vector<double> a(g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t mu = 0; mu < g.dim(); ++mu) a[mu] = calc.grad_S()[mu][i];
        const Spinor p = psi.at(i);
        out.set(i, rep.slash(a) * p + variant.particle_factor() * calc.mass() * p);
    }
    return out;
}

SpinorField gamma_D(const SpinorField& psi, const PolarCalculus& calc) {
    require_compatible(psi, calc, "gamma_D");
    const auto& g = psi.grid();
    const auto& rep = psi.rep();
    std::vector<ComplexCovector> D;
    for (std::size_t a = 0; a < psi.components(); ++a) D.push_back(kg::apply_D(psi[a], calc));
    SpinorField out(g, rep);
    const double hbar = calc.hbar();
    for (std::size_t i = 0; i < g.size(); ++i) {
        Spinor v = Spinor::Zero(static_cast<Eigen::Index>(rep.size()));
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            Spinor Dm(v.size());
            for (std::size_t a = 0; a < psi.components(); ++a) Dm(static_cast<Eigen::Index>(a)) = D[a][mu][i];
            v += kI * hbar * (rep[mu] * Dm);
        }
        out.set(i, v);
    }
    return out;
}

Residual square_dirac_check(const SpinorField& psi, const PolarCalculus& calc) {
    require_compatible(psi, calc, "square_dirac_check");
    const SpinorField twice = gamma_D(gamma_D(psi, calc), calc);
    const double h2 = calc.hbar() * calc.hbar();
    Residual r;
    const auto& g = psi.grid();
    for (std::size_t a = 0; a < psi.components(); ++a) {
        const ComplexField bd = kg::box_D(psi[a], calc);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.interior(i, calc.margin())) continue;
            r.abs = std::max(r.abs, std::abs(twice[a][i] + h2 * bd[i]));
            r.scale = std::max({r.scale, std::abs(twice[a][i]), h2 * std::abs(bd[i])});
        }
    }
    return r;
}

EikonalReport eikonal_identity_check(const PolarCalculus& calc) {
    if (!(calc.mass() > 0.0)) throw InvalidArgument("eikonal_identity_check needs mass > 0");
    const auto& g = calc.grid();
    const auto rep = GammaRepresentation::for_grid(g);
    const auto n = static_cast<Eigen::Index>(rep.size());
    const RealField& omega2 = calc.conformal().omega2;
    const double m2 = calc.mass() * calc.mass();
    EikonalReport out;
    std::vector<double> a(g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.interior(i, calc.margin())) continue;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) a[mu] = calc.grad_S()[mu][i];
        const Matrix s = rep.slash(a);
        const double sq = rep.square(a);
        out.clifford = std::max(out.clifford, (s * s - sq * Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
        out.mass_shell.abs = std::max(out.mass_shell.abs, std::abs(calc.grad_S_squared()[i] - m2 * omega2[i]));
        out.mass_shell.scale = std::max({out.mass_shell.scale, std::abs(calc.grad_S_squared()[i]), m2 * omega2[i]});
    }
    return out;
}

DensityResult spinor_density(const SpinorField& psi, double tolerance) {
    const auto& g = psi.grid();
    const Matrix& g0 = psi.rep().gamma0();
    DensityResult out{RealField(g), 0, 0.0};
    double norm2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Spinor p = psi.at(i);
        const cplx v = p.dot(g0 * p);  // conjugates the first argument
        out.rho[i] = v.real();
        out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
        norm2 = std::max(norm2, p.squaredNorm());
        if (v.real() < 0.0) ++out.negative_points;
    }
    if (out.max_imag > tolerance * std::max(norm2, 1.0)) {
        throw NumericalError("psi-bar psi has an imaginary part of " + std::to_string(out.max_imag) +
                             "; the gamma set is not hermitian-compatible");
    }
    return out;
}

Matrix momentum_hamiltonian(double k, double total_mass) {
    static const GammaRepresentation rep(Dim::two);
    return momentum_hamiltonian(std::vector<double>{k}, total_mass, rep);
}

Matrix momentum_hamiltonian(const std::vector<double>& k, double total_mass, const GammaRepresentation& rep) {
    if (k.size() + 1 != rep.count()) throw InvalidArgument("momentum needs one component per spatial axis");
    const auto n = static_cast<Eigen::Index>(rep.size());
    Matrix inner = total_mass * Matrix::Identity(n, n);
    std::size_t j = 0;
    for (std::size_t mu = 0; mu < rep.count(); ++mu) {
        if (mu == rep.time_index()) continue;
        inner += k[j++] * rep[mu];
    }
    return (rep.gamma0() / rep.inverse_metric()[rep.time_index()]) * inner;
}

DispersionPoint plane_wave_dispersion(double k, double mass, double vacuum_mass) {
    const double mt = mass + vacuum_mass;
    Eigen::SelfAdjointEigenSolver<Matrix> es(momentum_hamiltonian(k, mt), Eigen::EigenvaluesOnly);
    DispersionPoint p;
    p.k = k;
    p.numeric = es.eigenvalues().maxCoeff();
    p.closed = std::hypot(k, mt);
    p.abs_error = std::abs(p.numeric - p.closed);
    return p;
}

Spinor positive_energy_spinor(double k, double total_mass) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(momentum_hamiltonian(k, total_mass));
    Eigen::Index top = 0;
    es.eigenvalues().maxCoeff(&top);
    return es.eigenvectors().col(top);
}

SpinorField free_plane_wave(const SpacetimeGrid& g, double k, double total_mass, double hbar) {
    if (g.dim() != 2) throw InvalidArgument("free_plane_wave needs a 1+1 grid");
    const auto rep = GammaRepresentation::for_grid(g);
    const std::size_t t = g.time_axis();
    const std::size_t x = 1 - t;
    if (g.periodic(x)) {
        const double turns = k * (g.axis(x).upper - g.axis(x).lower) / (2.0 * std::numbers::pi * hbar);
        if (std::abs(turns - std::round(turns)) > 1e-9) {
            throw InvalidArgument("plane-wave momentum does not fit the periodic axis");
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(momentum_hamiltonian(std::vector<double>{k}, total_mass, rep));
    Eigen::Index top = 0;
    const double E = es.eigenvalues().maxCoeff(&top);
    const Spinor u = es.eigenvectors().col(top);
    const ComplexField phase = ComplexField::sample(g, [&](std::span<const double> c) {
        return std::exp(-kI * (E * c[t] - k * c[x]) / hbar);
    });
    return constant_spinor_times(phase, u, rep);
}

}  // namespace vdlab::dirac
