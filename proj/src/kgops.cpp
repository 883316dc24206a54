#include "vdlab/kgops.hpp"

#include <algorithm>
#include <cmath>

#include "vdlab/summation.hpp"

namespace vdlab::kg {
namespace {

constexpr cplx kI(0.0, 1.0);

ComplexCovector apply_D_core(const ComplexField& phi, const ComplexCovector& grad_phi, const PolarCalculus& calc,
                             DSign sign) {
    const double s = sign == DSign::minus ? -1.0 : 1.0;
    const cplx coef = s * kI / calc.hbar();
    std::vector<ComplexField> comps;
    for (std::size_t mu = 0; mu < grad_phi.dim(); ++mu) {
        ComplexField c(phi.grid());
        for (std::size_t i = 0; i < phi.size(); ++i) {
            c[i] = grad_phi[mu][i] + coef * calc.grad_S()[mu][i] * phi[i];
        }
        comps.push_back(std::move(c));
    }
    return ComplexCovector(Variance::covariant, std::move(comps));
}

ComplexField box_D_core(const ComplexField& phi, const ComplexCovector& grad_phi, const ComplexField& box_phi,
                        const PolarCalculus& calc) {
    const double hbar = calc.hbar();
    const auto& gSu = calc.grad_S_up();
    ComplexField out(phi.grid());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        cplx cross(0.0, 0.0);
        for (std::size_t mu = 0; mu < gSu.dim(); ++mu) cross += gSu[mu][i] * grad_phi[mu][i];
        out[i] = box_phi[i] - (2.0 * kI / hbar) * cross - (kI / hbar) * calc.box_S()[i] * phi[i] -
                 (calc.grad_S_squared()[i] / (hbar * hbar)) * phi[i];
    }
    return out;
}

void require_same_grid(const PolarCalculus& calc, const SpacetimeGrid& g, const char* what) {
    if (!(calc.grid() == g)) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

void require_mass(const PolarCalculus& calc, const char* what) {
    if (!(calc.mass() > 0.0)) throw InvalidArgument(std::string(what) + " needs mass > 0");
}

}  // namespace

ComplexCovector apply_D(const PolarCalculus& calc, DSign sign) {
    return apply_D_core(calc.phi(), calc.grad_phi(), calc, sign);
}

ComplexCovector apply_D(const ComplexField& phi, const PolarCalculus& calc, DSign sign) {
    require_same_grid(calc, phi.grid(), "apply_D");
    return apply_D_core(phi, gradient(phi, calc.order()), calc, sign);
}

ComplexField box_D(const PolarCalculus& calc) {
    return box_D_core(calc.phi(), calc.grad_phi(), calc.box_phi(), calc);
}

ComplexField box_D(const ComplexField& phi, const PolarCalculus& calc) {
    require_same_grid(calc, phi.grid(), "box_D");
    return box_D_core(phi, gradient(phi, calc.order()), dalembertian(phi, calc.order()), calc);
}

ComplexField box_D_nested(const ComplexField& phi, const PolarCalculus& calc) {
    require_same_grid(calc, phi.grid(), "box_D_nested");
    const ComplexCovector up = raise_index(apply_D(phi, calc, DSign::minus));
    ComplexField out = divergence(up, calc.order());
    const cplx coef = -kI / calc.hbar();
    for (std::size_t i = 0; i < out.size(); ++i) {
        cplx s(0.0, 0.0);
        for (std::size_t mu = 0; mu < up.dim(); ++mu) s += calc.grad_S()[mu][i] * up[mu][i];
        out[i] += coef * s;
    }
    return out;
}

ShiftReport shift_residual(const PolarCalculus& calc) {
    const auto& g = calc.grid();
    const std::size_t margin = calc.margin();
    const ComplexField dd = box_D(calc);
    const ComplexCovector dminus = apply_D(calc, DSign::minus);
    const auto& phi = calc.phi();
    const double hbar = calc.hbar();

    ShiftReport r;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.interior(i, margin)) continue;
        const cplx qphi = calc.qtilde()[i] * phi[i];
        r.box.abs = std::max(r.box.abs, std::abs(qphi - dd[i]));
        r.box.scale = std::max({r.box.scale, std::abs(qphi), std::abs(calc.box_phi()[i])});

        const cplx phase = phi[i] / calc.sqrt_rho()[i];
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            const double dsr = calc.grad_sqrt_rho()[mu][i];
            const cplx lhs_minus = dsr * phase;
            r.gradient_minus.abs = std::max(r.gradient_minus.abs, std::abs(lhs_minus - dminus[mu][i]));
            r.gradient_minus.scale = std::max(r.gradient_minus.scale, std::abs(calc.grad_phi()[mu][i]));

            const cplx dplus = dsr + (kI / hbar) * calc.grad_S()[mu][i] * calc.sqrt_rho()[i];
            r.gradient_plus.abs = std::max(r.gradient_plus.abs, std::abs(dplus * phase - calc.grad_phi()[mu][i]));
            r.gradient_plus.scale = r.gradient_minus.scale;
        }
    }
    return r;
}

namespace {

PolarResidual kg_polar_impl(const PolarCalculus& calc, const RealField* lambda) {
    require_mass(calc, "kg_residual_polar");
    const auto& g = calc.grid();
    const ConformalState& c = calc.conformal();
    const double m = calc.mass();
    const double hbar = calc.hbar();
    const auto& rho = calc.polar().rho();
    const auto& a = calc.sqrt_rho();

    PolarResidual r{RealField(g), RealField(g), {}, {}, lambda != nullptr};

    RealField lam_term(g);
    if (lambda) {
        if (!(lambda->grid() == g)) throw InvalidArgument("kg_residual_polar: lambda grid mismatch");
        require_finite(*lambda, "lambda");
        const RealField lam_over_a = zip(*lambda, a, [](double l, double s) { return l / s; });
        const RealField box_lam_over_a = dalembertian(lam_over_a, calc.order());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double bracket = box_lam_over_a[i] - (*lambda)[i] * calc.box_sqrt_rho()[i] / rho[i];
            lam_term[i] = hbar * hbar / (2.0 * m * c.omega2[i] * a[i]) * bracket;
        }
    }

    for (std::size_t i = 0; i < g.size(); ++i) {
        const double kin = calc.grad_S_squared()[i];
        const double pot = m * m * c.omega2[i];
        r.motion[i] = kin - pot;
        if (lambda) r.motion[i] += lam_term[i];
    }

    Residual cont;
    if (calc.mode() == DerivativeMode::stencil) {
        std::vector<RealField> flux;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            RealField f(g);
            for (std::size_t i = 0; i < g.size(); ++i) f[i] = rho[i] * c.omega2[i] * calc.grad_S_up()[mu][i];
            flux.push_back(std::move(f));
        }
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            const RealField d = partial(flux[mu], mu, calc.order());
            r.continuity += d;
            // size of the individual stencil terms
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g.interior(i, calc.margin())) cont.scale = std::max(cont.scale, std::abs(flux[mu][i]) / g.spacing(mu));
            }
        }
    } else {
        for (std::size_t i = 0; i < g.size(); ++i) {
            double t_rho = 0.0;
            double t_q = 0.0;
            double size = std::abs(calc.box_S()[i]);
            for (std::size_t mu = 0; mu < g.dim(); ++mu) {
                const double su = calc.grad_S_up()[mu][i];
                const double a_mu = 2.0 * calc.grad_sqrt_rho()[mu][i] / a[i] * su;
                const double q_mu = calc.grad_log_omega2()[mu][i] * su;
                t_rho += a_mu;
                t_q += q_mu;
                size = std::max({size, std::abs(a_mu), std::abs(q_mu)});
            }
            const double w = rho[i] * c.omega2[i];
            r.continuity[i] = w * (t_rho + t_q + calc.box_S()[i]);
            if (g.interior(i, calc.margin())) cont.scale = std::max(cont.scale, w * size);
        }
    }

    Residual mot;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.interior(i, calc.margin())) continue;
        mot.abs = std::max(mot.abs, std::abs(r.motion[i]));
        mot.scale = std::max({mot.scale, std::abs(calc.grad_S_squared()[i]), m * m * c.omega2[i],
                              std::abs(lam_term[i])});
        cont.abs = std::max(cont.abs, std::abs(r.continuity[i]));
    }
    r.motion_norm = mot;
    r.continuity_norm = cont;
    return r;
}

}  // namespace

PolarResidual kg_residual_polar(const PolarCalculus& calc) { return kg_polar_impl(calc, nullptr); }

PolarResidual kg_residual_polar(const PolarCalculus& calc, const RealField& lambda) {
    return kg_polar_impl(calc, &lambda);
}

WaveResidual kg_residual_wave(const PolarCalculus& calc) {
    require_mass(calc, "kg_residual_wave");
    const auto& g = calc.grid();
    const auto& phi = calc.phi();
    const double hbar = calc.hbar();
    const double m2h = calc.mass() * calc.mass() / (hbar * hbar);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (std::norm(phi[i]) < calc.polar().rho_floor()) {
            throw NumericalError("kg_residual_wave: node in phi at index " + g.format_index(i));
        }
    }

    WaveResidual r{ComplexField(g), ComplexField(g), {}, {}, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        double qs = 0.0;
        cplx conf(0.0, 0.0);
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            qs += calc.grad_Q()[mu][i] * calc.grad_S_up()[mu][i];
            const cplx up = g.inverse_metric(mu) * calc.grad_phi()[mu][i];
            const cplx ratio = up / phi[i];
            conf += calc.grad_log_omega2()[mu][i] * (ratio - std::conj(ratio));
        }
        const cplx base = calc.box_phi()[i] + m2h * phi[i];
        const cplx diss = (kI / hbar) * qs * phi[i];
        r.quantum_force_form[i] = base + diss;
        r.conformal_form[i] = base + 0.5 * conf * phi[i];

        if (!g.interior(i, calc.margin())) continue;
        const double scale = std::max(std::abs(calc.box_phi()[i]), std::abs(m2h * phi[i]));
        r.norm.abs = std::max(r.norm.abs, std::abs(r.quantum_force_form[i]));
        r.norm.scale = std::max(r.norm.scale, scale);
        r.conformal_norm.abs = std::max(r.conformal_norm.abs, std::abs(r.conformal_form[i]));
        r.conformal_norm.scale = r.norm.scale;
        r.form_gap = std::max(r.form_gap, std::abs(r.quantum_force_form[i] - r.conformal_form[i]));
        r.dissipative = std::max(r.dissipative, std::abs(diss));
        r.real_part = std::max(r.real_part, std::abs(r.quantum_force_form[i].real()));
        r.imag_part = std::max(r.imag_part, std::abs(r.quantum_force_form[i].imag()));
    }
    return r;
}

CompactFormReport compact_form_check(const PolarCalculus& calc) {
    const WaveResidual w = kg_residual_wave(calc);
    const ComplexField dd = box_D(calc);
    const PolarResidual pr = kg_residual_polar(calc);
    const auto& g = calc.grid();
    const auto& phi = calc.phi();
    const double hbar = calc.hbar();
    const double m2 = calc.mass() * calc.mass();
    const auto& c = calc.conformal();

    CompactFormReport r;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.interior(i, calc.margin())) continue;
        const cplx diff = w.quantum_force_form[i] - dd[i];
        const double rw = calc.polar().rho()[i] * c.omega2[i];
        const cplx defect = (kI / hbar) * (pr.continuity[i] / rw) * phi[i] +
                            ((m2 - calc.grad_S_squared()[i]) / (hbar * hbar)) * phi[i];
        r.wave_norm = std::max(r.wave_norm, std::abs(w.quantum_force_form[i]));
        r.box_d_norm = std::max(r.box_d_norm, std::abs(dd[i]));
        r.difference = std::max(r.difference, std::abs(diff));
        r.corrected.abs = std::max(r.corrected.abs, std::abs(diff - defect));
        r.corrected.scale = std::max({r.corrected.scale, std::abs(calc.box_phi()[i]), std::abs(dd[i]),
                                      std::abs(w.quantum_force_form[i])});
    }
    return r;
}

GeneralKgResidual general_kg_residual(const PolarCalculus& calc, const RealField& lambda) {
    require_mass(calc, "general_kg_residual");
    const auto& g = calc.grid();
    if (!(lambda.grid() == g)) throw InvalidArgument("general_kg_residual: lambda grid mismatch");
    require_finite(lambda, "lambda");
    const auto& c = calc.conformal();
    const double m = calc.mass();
    const double hbar = calc.hbar();
    const auto& rho = calc.polar().rho();
    const auto& phi = calc.phi();
    const RealField box_lam = dalembertian(lambda, calc.order());
    const ComplexField dd = box_D(calc);

    GeneralKgResidual r{ComplexField(g), RealField(g), {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double b = (box_lam[i] - 2.0 * m * m * (1.0 - c.Q[i]) * lambda[i] / (hbar * hbar)) /
                         (2.0 * m * c.omega2[i] * rho[i]);
        r.bracket[i] = b;
        const cplx bphi = b * phi[i];
        r.field[i] = dd[i] - bphi;
        if (!g.interior(i, calc.margin())) continue;
        r.norm.abs = std::max(r.norm.abs, std::abs(r.field[i]));
        r.norm.scale = std::max({r.norm.scale, std::abs(dd[i]), std::abs(bphi), std::abs(calc.box_phi()[i])});
    }
    return r;
}

// ---- action ---------------------------------------------------------------

namespace {

void check_action_inputs(const PolarDecomposition& p, const ConformalState& c, const RealField& lambda,
                         const ActionParams& a) {
    if (a.ricci_scalar != 0.0) {
        throw InvalidArgument("constant diagonal metric: the Ricci scalar is 0, got " + std::to_string(a.ricci_scalar));
    }
    if (!(a.kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    if (!(a.mass > 0.0)) throw InvalidArgument("action needs mass > 0");
    if (a.mass != p.mass() || a.hbar != p.hbar()) {
        throw InvalidArgument("action parameters disagree with the polar fields' mass/hbar");
    }
    if (!(c.omega2.grid() == p.grid()) || !(lambda.grid() == p.grid())) {
        throw InvalidArgument("action: field grid mismatch");
    }
    for (std::size_t i = 0; i < c.omega2.size(); ++i) {
        if (!(c.omega2[i] > 0.0)) throw NumericalError("omega2 must be positive at " + p.grid().format_index(i));
    }
}

std::size_t action_margin(StencilOrder order) { return order == StencilOrder::second ? 4 : 6; }

}  // namespace

double action_value(const PolarDecomposition& p, const ConformalState& c, const RealField& lambda,
                    const ActionParams& a, StencilOrder order) {
    check_action_inputs(p, c, lambda, a);
    const auto& g = p.grid();
    const double m = a.mass;
    const double hbar = a.hbar;
    const std::vector<double> jumps = p.seam_jumps();

    const RealField omega = map(c.omega2, [](double w) { return std::sqrt(w); });
    const RealCovector d_omega = gradient(omega, order);
    const RealCovector d_S = gradient(p.S(), order, jumps);
    const RealField amp = map(p.rho(), [](double r) { return std::sqrt(r); });
    const RealField box_amp = dalembertian(amp, order);

    const double sqrt_g = g.volume_factor();
    CompensatedSum total;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double om_sq = 0.0;
        double s_sq = 0.0;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) {
            const double inv = g.inverse_metric(mu);
            om_sq += inv * d_omega[mu][i] * d_omega[mu][i];
            s_sq += inv * d_S[mu][i] * d_S[mu][i];
        }
        const double w2 = c.omega2[i];
        const double gravity = (a.ricci_scalar * w2 - 6.0 * om_sq) / (2.0 * a.kappa);
        const double matter = p.rho()[i] / m * w2 * s_sq - m * p.rho()[i] * w2 * w2;
        const double constraint = lambda[i] * (std::log(w2) - hbar * hbar / (m * m) * box_amp[i] / amp[i]);
        total.add(sqrt_g * g.quadrature_weight(i) * (gravity + matter + constraint));
    }
    return total.value();
}

EulerLagrangeFields euler_lagrange(const PolarDecomposition& p, const ConformalState& c, const RealField& lambda,
                                   const ActionParams& a, StencilOrder order) {
    check_action_inputs(p, c, lambda, a);
    const auto& g = p.grid();
    const double m = a.mass;
    const double hbar = a.hbar;
    const double sqrt_g = g.volume_factor();
    const std::vector<double> jumps = p.seam_jumps();

    const RealCovector d_S = gradient(p.S(), order, jumps);
    const RealCovector d_S_up = raise_index(d_S);
    const RealField amp = map(p.rho(), [](double r) { return std::sqrt(r); });
    const RealField box_amp = dalembertian(amp, order);
    const RealField box_lam_over_amp = dalembertian(zip(lambda, amp, [](double l, double s) { return l / s; }), order);

    RealField div(g);
    for (std::size_t mu = 0; mu < g.dim(); ++mu) {
        RealField flux(g);
        for (std::size_t i = 0; i < g.size(); ++i) flux[i] = p.rho()[i] * c.omega2[i] * d_S_up[mu][i];
        div += partial(flux, mu, order);
    }

    EulerLagrangeFields el{RealField(g), RealField(g), RealField(g)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s_sq = 0.0;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) s_sq += d_S[mu][i] * d_S_up[mu][i];
        const double w2 = c.omega2[i];
        const double r = p.rho()[i];
        el.S[i] = sqrt_g * (-2.0 / m) * div[i];
        el.rho[i] = sqrt_g * (w2 / m * s_sq - m * w2 * w2 -
                              hbar * hbar / (2.0 * m * m * amp[i]) * (box_lam_over_amp[i] - lambda[i] * box_amp[i] / r));
        el.lambda[i] = sqrt_g * (std::log(w2) - hbar * hbar / (m * m) * box_amp[i] / amp[i]);
    }
    return el;
}

double ActionGradientReport::worst_relative() const {
    double w = 0.0;
    for (const auto& f : fields) w = std::max(w, f.relative_deviation);
    return w;
}

double ActionGradientReport::worst_max_fd() const {
    double w = 0.0;
    for (const auto& f : fields) w = std::max(w, f.max_fd);
    return w;
}

namespace {

double pearson(const RealField& a, const RealField& b, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 1.0;
    CompensatedSum sa, sb;
    for (auto i : idx) {
        sa.add(a[i]);
        sb.add(b[i]);
    }
    const double n = static_cast<double>(idx.size());
    const double ma = sa.value() / n;
    const double mb = sb.value() / n;
    CompensatedSum sab, saa, sbb;
    for (auto i : idx) {
        sab.add((a[i] - ma) * (b[i] - mb));
        saa.add((a[i] - ma) * (a[i] - ma));
        sbb.add((b[i] - mb) * (b[i] - mb));
    }
    const double den = std::sqrt(saa.value() * sbb.value());
    // Constant fields (stationary points) carry no pattern to correlate.
    if (!(den > 1e-300)) return 1.0;
    return sab.value() / den;
}

}  // namespace

ActionGradientReport action_gradient_check(const PolarDecomposition& p, const ConformalState& c,
                                           const RealField& lambda, const ActionParams& a, double epsilon,
                                           StencilOrder order) {
    if (!(epsilon > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    const auto& g = p.grid();
    const EulerLagrangeFields el = euler_lagrange(p, c, lambda, a, order);
    const std::vector<std::size_t> pts = g.interior_indices(action_margin(order));

    ActionGradientReport report;
    report.epsilon = epsilon;
    report.perturbed_points = pts.size();

    RealField fd_S(g), fd_rho(g), fd_lam(g);
    RealField S = p.S();
    RealField rho = p.rho();
    RealField lam = lambda;
    const double sqrt_g_inv = 1.0;  // el already carries sqrt(-g)
    for (auto j : pts) {
        const double w = g.quadrature_weight(j) * sqrt_g_inv;

        const double s0 = S[j];
        S[j] = s0 + epsilon;
        const double sp = action_value(p.with_S(S), c, lambda, a, order);
        S[j] = s0 - epsilon;
        const double sm = action_value(p.with_S(S), c, lambda, a, order);
        S[j] = s0;
        fd_S[j] = (sp - sm) / (2.0 * epsilon * w);

        const double r0 = rho[j];
        rho[j] = r0 + epsilon;
        const double rp = action_value(p.with_rho(rho), c, lambda, a, order);
        rho[j] = r0 - epsilon;
        const double rm = action_value(p.with_rho(rho), c, lambda, a, order);
        rho[j] = r0;
        fd_rho[j] = (rp - rm) / (2.0 * epsilon * w);

        const double l0 = lam[j];
        lam[j] = l0 + epsilon;
        const double lp = action_value(p, c, lam, a, order);
        lam[j] = l0 - epsilon;
        const double lm = action_value(p, c, lam, a, order);
        lam[j] = l0;
        fd_lam[j] = (lp - lm) / (2.0 * epsilon * w);
    }

    auto compare = [&](const char* name, RealField fd, const RealField& ref) {
        GradientComparison gc{name, std::move(fd), RealField(g), 0.0, 0.0, 0.0, 0.0, 0.0};
        for (auto j : pts) {
            gc.euler_lagrange[j] = ref[j];
            gc.max_fd = std::max(gc.max_fd, std::abs(gc.finite_difference[j]));
            gc.max_el = std::max(gc.max_el, std::abs(ref[j]));
            gc.max_deviation = std::max(gc.max_deviation, std::abs(gc.finite_difference[j] - ref[j]));
        }
        gc.relative_deviation = gc.max_el > 0.0 ? gc.max_deviation / gc.max_el : gc.max_deviation;
        gc.correlation = pearson(gc.finite_difference, gc.euler_lagrange, pts);
        report.fields.push_back(std::move(gc));
    };
    compare("S", std::move(fd_S), el.S);
    compare("rho", std::move(fd_rho), el.rho);
    compare("lambda", std::move(fd_lam), el.lambda);
    return report;
}

}  // namespace vdlab::kg
