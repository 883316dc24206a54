#include "vdlab/calculus.hpp"

#include <cmath>

namespace vdlab {
namespace {

void require_node_free(const ComplexField& phi, double floor) {
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (std::norm(phi[i]) < floor) {
            throw NumericalError("phi has a node at index " + phi.grid().format_index(i));
        }
    }
}

void require_pack_shape(const std::vector<RealField>& v, const SpacetimeGrid& g, const char* name) {
    if (v.size() != g.dim()) {
        throw InvalidArgument(std::string("analytic pack: ") + name + " needs one field per axis");
    }
    for (const auto& f : v) {
        if (!(f.grid() == g)) throw InvalidArgument(std::string("analytic pack: ") + name + " grid mismatch");
    }
}

Residual phase_identity_core(const ComplexField& phi, const ComplexCovector& grad_phi, const RealCovector& grad_S,
                             double hbar, std::size_t margin) {
    const auto& g = phi.grid();
    const cplx i_over_hbar(0.0, 1.0 / hbar);
    Residual r;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!g.interior(i, margin)) continue;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            const cplx ratio = grad_phi[mu][i] / phi[i];
            const cplx lhs = 0.5 * (ratio - std::conj(ratio));
            const cplx rhs = i_over_hbar * grad_S[mu][i];
            r.abs = std::max(r.abs, std::abs(lhs - rhs));
            r.scale = std::max(r.scale, std::abs(rhs));
        }
    }
    return r;
}

}  // namespace

const char* to_string(DerivativeMode m) { return m == DerivativeMode::stencil ? "stencil" : "analytic"; }

PolarCalculus::PolarCalculus(const PolarDecomposition& p)
    : polar_(p),
      sqrt_rho_(map(p.rho(), [](double r) { return std::sqrt(r); })),
      box_sqrt_rho_(p.grid()),
      box_S_(p.grid()),
      grad_S_sq_(p.grid()),
      qtilde_(p.grid()),
      phi_(from_polar(p)),
      box_phi_(p.grid()) {}

PolarCalculus PolarCalculus::stencil(const PolarDecomposition& p, StencilOrder order) {
    PolarCalculus c(p);
    c.mode_ = DerivativeMode::stencil;
    c.order_ = order;
    const std::vector<double> jumps = p.seam_jumps();

    c.grad_sqrt_rho_ = gradient(c.sqrt_rho_, order);
    c.box_sqrt_rho_ = dalembertian(c.sqrt_rho_, order);
    c.grad_S_ = gradient(p.S(), order, jumps);
    c.grad_S_up_ = raise_index(*c.grad_S_);
    c.box_S_ = dalembertian(p.S(), order, jumps);
    c.grad_S_sq_ = contract(*c.grad_S_, *c.grad_S_up_);
    c.qtilde_ = zip(c.box_sqrt_rho_, c.sqrt_rho_, [](double b, double a) { return b / a; });
    c.grad_phi_ = gradient(c.phi_, order);
    c.box_phi_ = dalembertian(c.phi_, order);
    c.finish_conformal_stencil();
    return c;
}

void PolarCalculus::finish_conformal_stencil() {
    if (!(mass() > 0.0)) return;
    const double k = hbar() * hbar() / (mass() * mass());
    RealField Q = map(qtilde_, [k](double v) { return k * v; });
    try {
        conformal_ = conformal_from_Q(qtilde_, std::move(Q));
    } catch (const NumericalError& e) {
        conformal_error_ = e.what();
        return;
    }
    grad_Q_ = gradient(conformal_->Q, order_);
    RealCovector g_om = gradient(conformal_->omega2, order_);
    for (std::size_t mu = 0; mu < g_om.dim(); ++mu) {
        g_om[mu] = zip(g_om[mu], conformal_->omega2, [](double d, double w) { return d / w; });
    }
    grad_log_omega2_ = std::move(g_om);
}

PolarCalculus PolarCalculus::analytic(const PolarDecomposition& p, const AnalyticPack& pack, StencilOrder order) {
    const auto& g = p.grid();
    require_pack_shape(pack.grad_log_rho, g, "grad_log_rho");
    require_pack_shape(pack.second_log_rho, g, "second_log_rho");
    require_pack_shape(pack.grad_S, g, "grad_S");
    require_pack_shape(pack.second_S, g, "second_S");

    PolarCalculus c(p);
    c.mode_ = DerivativeMode::analytic;
    c.order_ = order;
    const std::size_t dim = g.dim();
    const double hbar = p.hbar();

    std::vector<RealField> gsr;
    for (std::size_t mu = 0; mu < dim; ++mu) {
        gsr.push_back(zip(c.sqrt_rho_, pack.grad_log_rho[mu], [](double a, double l) { return 0.5 * a * l; }));
    }
    c.grad_sqrt_rho_ = RealCovector(Variance::covariant, std::move(gsr));
    c.grad_S_ = RealCovector(Variance::covariant, pack.grad_S);
    c.grad_S_up_ = raise_index(*c.grad_S_);
    c.grad_S_sq_ = contract(*c.grad_S_, *c.grad_S_up_);

    std::vector<ComplexField> gphi;
    for (std::size_t mu = 0; mu < dim; ++mu) gphi.emplace_back(g);

    for (std::size_t i = 0; i < g.size(); ++i) {
        double q = 0.0;
        double boxS = 0.0;
        cplx box_ratio(0.0, 0.0);
        for (std::size_t mu = 0; mu < dim; ++mu) {
            const double inv = g.inverse_metric(mu);
            const double l1 = pack.grad_log_rho[mu][i];
            const double l2 = pack.second_log_rho[mu][i];
            const double s1 = pack.grad_S[mu][i];
            const double s2 = pack.second_S[mu][i];
            q += inv * (0.5 * l2 + 0.25 * l1 * l1);
            boxS += inv * s2;
            const cplx first(0.5 * l1, s1 / hbar);
            box_ratio += inv * (cplx(0.5 * l2, s2 / hbar) + first * first);
            gphi[mu][i] = first * c.phi_[i];
        }
        c.qtilde_[i] = q;
        c.box_sqrt_rho_[i] = q * c.sqrt_rho_[i];
        c.box_S_[i] = boxS;
        c.box_phi_[i] = box_ratio * c.phi_[i];
    }
    c.grad_phi_ = ComplexCovector(Variance::covariant, std::move(gphi));

    if (p.mass() > 0.0) {
        const double k = hbar * hbar / (p.mass() * p.mass());
        RealField Q = map(c.qtilde_, [k](double v) { return k * v; });
        try {
            c.conformal_ = conformal_from_Q(c.qtilde_, std::move(Q));
        } catch (const NumericalError& e) {
            c.conformal_error_ = e.what();
            return c;
        }
        if (pack.grad_qtilde.empty()) {
            c.grad_Q_ = gradient(c.conformal_->Q, order);
        } else {
            require_pack_shape(pack.grad_qtilde, g, "grad_qtilde");
            std::vector<RealField> gq;
            for (std::size_t mu = 0; mu < dim; ++mu) gq.push_back(map(pack.grad_qtilde[mu], [k](double v) { return k * v; }));
            c.grad_Q_ = RealCovector(Variance::covariant, std::move(gq));
        }
        c.grad_log_omega2_ = *c.grad_Q_;
    }
    return c;
}

void PolarCalculus::require_conformal() const {
    if (conformal_) return;
    if (!conformal_error_.empty()) throw NumericalError(conformal_error_);
    throw InvalidArgument("the conformal state needs mass > 0");
}

RealField PolarCalculus::quantum_potential_Q() const {
    if (!(mass() > 0.0)) throw InvalidArgument("Q needs mass > 0");
    const double k = hbar() * hbar() / (mass() * mass());
    return map(qtilde_, [k](double v) { return k * v; });
}

const ConformalState& PolarCalculus::conformal() const {
    require_conformal();
    return *conformal_;
}

const RealCovector& PolarCalculus::grad_Q() const {
    require_conformal();
    return *grad_Q_;
}

const RealCovector& PolarCalculus::grad_log_omega2() const {
    require_conformal();
    return *grad_log_omega2_;
}

Residual phase_identity_residual(const PolarCalculus& calc) {
    require_node_free(calc.phi(), calc.polar().rho_floor());
    return phase_identity_core(calc.phi(), calc.grad_phi(), calc.grad_S(), calc.hbar(), calc.margin());
}

Residual phase_identity_residual(const ComplexField& phi, const PolarDecomposition& p, StencilOrder order) {
    phi.check_same_grid(p.rho());
    require_node_free(phi, p.rho_floor());
    const ComplexCovector gphi = gradient(phi, order);
    const std::vector<double> jumps = p.seam_jumps();
    const RealCovector gS = gradient(p.S(), order, jumps);
    return phase_identity_core(phi, gphi, gS, p.hbar(), 2 * stencil_radius(order));
}

}  // namespace vdlab
