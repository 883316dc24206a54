#include "vdlab/polar.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace vdlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wrap to (-pi, pi].
double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);
    return a <= -std::numbers::pi ? a + kTwoPi : a;
}

void check_density(const RealField& rho, double floor) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!std::isfinite(rho[i])) {
            throw NumericalError("rho: non-finite sample at index " + rho.grid().format_index(i));
        }
        if (rho[i] < floor) {
            throw NumericalError("rho = " + std::to_string(rho[i]) + " below floor " + std::to_string(floor) +
                                 " at index " + rho.grid().format_index(i));
        }
    }
}

}  // namespace

PolarDecomposition::PolarDecomposition(RealField rho, RealField S, double hbar, double mass,
                                       std::vector<int> winding, double rho_floor)
    : rho_(std::move(rho)), S_(std::move(S)), hbar_(hbar), mass_(mass), winding_(std::move(winding)),
      rho_floor_(rho_floor) {
    rho_.check_same_grid(S_);
    if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) throw InvalidArgument("hbar must be positive");
    if (!(mass_ >= 0.0) || !std::isfinite(mass_)) throw InvalidArgument("mass must be non-negative");
    if (!(rho_floor_ > 0.0)) throw InvalidArgument("density floor must be positive");
    const auto& g = rho_.grid();
    if (winding_.empty()) winding_.assign(g.dim(), 0);
    if (winding_.size() != g.dim()) throw InvalidArgument("winding needs one entry per axis");
    for (std::size_t a = 0; a < g.dim(); ++a) {
        if (winding_[a] != 0 && !g.periodic(a)) {
            throw InvalidArgument("nonzero winding on one-sided axis " + std::to_string(a));
        }
    }
    check_density(rho_, rho_floor_);
    require_finite(S_, "S");
}

std::vector<double> PolarDecomposition::seam_jumps() const {
    std::vector<double> j(winding_.size());
    for (std::size_t a = 0; a < j.size(); ++a) j[a] = kTwoPi * hbar_ * winding_[a];
    return j;
}

PolarDecomposition PolarDecomposition::with_rho(RealField rho) const {
    return PolarDecomposition(std::move(rho), S_, hbar_, mass_, winding_, rho_floor_);
}

PolarDecomposition PolarDecomposition::with_S(RealField S) const {
    return PolarDecomposition(rho_, std::move(S), hbar_, mass_, winding_, rho_floor_);
}

PolarDecomposition PolarDecomposition::with_mass(double mass) const {
    return PolarDecomposition(rho_, S_, hbar_, mass, winding_, rho_floor_);
}

ComplexField from_polar(const PolarDecomposition& p) {
    ComplexField phi(p.grid());
    const double inv_hbar = 1.0 / p.hbar();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        phi[i] = std::polar(std::sqrt(p.rho()[i]), p.S()[i] * inv_hbar);
    }
    return phi;
}

PolarDecomposition to_polar(const ComplexField& phi, double hbar, double mass, double rho_floor) {
    require_finite(phi, "to_polar");
    const auto& g = phi.grid();
    RealField rho(g);
    RealField theta(g);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        rho[i] = std::norm(phi[i]);
        if (rho[i] < rho_floor) {
            throw NumericalError("|phi|^2 below floor at index " + g.format_index(i) + " (node present)");
        }
    }

    const std::size_t dim = g.dim();
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double arg = std::arg(phi[i]);
        std::size_t ref = i;
        for (std::size_t a = dim; a-- > 0;) {
            if (g.index_along(i, a) > 0) {
                ref = i - g.stride(a);
                break;
            }
        }
        theta[i] = ref == i ? arg : theta[ref] + wrap_angle(arg - theta[ref]);
    }

    std::vector<int> winding(dim, 0);
    for (std::size_t a = 0; a < dim; ++a) {
        if (!g.periodic(a)) continue;
        const std::size_t last = (g.points(a) - 1) * g.stride(a);
        const double closed = theta[last] + wrap_angle(std::arg(phi[0]) - theta[last]);
        winding[a] = static_cast<int>(std::lround((closed - theta[0]) / kTwoPi));
    }

    theta *= hbar;
    return PolarDecomposition(std::move(rho), std::move(theta), hbar, mass, std::move(winding), rho_floor);
}

RealField qtilde(const PolarDecomposition& p, StencilOrder order) {
    RealField amp = map(p.rho(), [](double r) { return std::sqrt(r); });
    RealField box = dalembertian(amp, order);
    return zip(box, amp, [](double b, double a) { return b / a; });
}

ConformalState conformal_from_Q(RealField qt, RealField Q) {
    constexpr double kMaxExponent = 709.0;
    double qmax = -std::numeric_limits<double>::infinity();
    double qmin = std::numeric_limits<double>::infinity();
    for (double q : Q.values()) {
        qmax = std::max(qmax, q);
        qmin = std::min(qmin, q);
    }
    if (qmax > kMaxExponent) {
        throw NumericalError("exp(Q) overflows: max Q = " + std::to_string(qmax));
    }
    if (qmin < -kMaxExponent) {
        throw NumericalError("exp(Q) underflows to a vanishing conformal factor: min Q = " + std::to_string(qmin));
    }
    RealField omega2 = map(Q, [](double q) { return std::exp(q); });
    return ConformalState{std::move(qt), std::move(Q), std::move(omega2)};
}

ConformalState quantum_potential(const PolarDecomposition& p, StencilOrder order) {
    if (!(p.mass() > 0.0)) throw InvalidArgument("quantum potential Q needs mass > 0");
    RealField qt = qtilde(p, order);
    const double c = p.hbar() * p.hbar() / (p.mass() * p.mass());
    RealField Q = map(qt, [c](double v) { return c * v; });
    return conformal_from_Q(std::move(qt), std::move(Q));
}

RealCovector drift_velocity(const PolarDecomposition& p, StencilOrder order) {
    RealField amp = map(p.rho(), [](double r) { return std::sqrt(r); });
    RealCovector up = raise_index(gradient(amp, order));
    std::vector<RealField> comps;
    for (std::size_t a = 0; a < up.dim(); ++a) {
        comps.push_back(zip(up[a], amp, [](double v, double s) { return v / s; }));
    }
    return RealCovector(Variance::contravariant, std::move(comps));
}

}  // namespace vdlab
