#include "vdlab/vacuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vdlab/kgops.hpp"

namespace vdlab::vacuum {
namespace {

std::size_t spatial_axis(const SpacetimeGrid& g) {
    if (g.dim() != 2) throw InvalidArgument("static vacuum solves need a 1+1 grid");
    return g.time_axis() == 0 ? 1 : 0;
}

std::string locus(const std::vector<double>& xs) {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << "x = " << xs[i];
    return os.str();
}

// Points whose stencil neighbourhood (radius r along each axis) is valid and
// that keep `margin` samples from one-sided boundaries.
std::vector<std::size_t> safe_points(const SpacetimeGrid& g, const std::vector<std::uint8_t>& valid,
                                     std::size_t radius, std::size_t margin) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!valid[i] || !g.interior(i, margin)) continue;
        bool ok = true;
        for (std::size_t a = 0; a < g.dim() && ok; ++a) {
            const std::size_t n = g.points(a);
            const std::size_t j = g.index_along(i, a);
            const std::size_t base = i - j * g.stride(a);
            for (std::size_t d = 1; d <= radius && ok; ++d) {
                for (int sgn : {-1, 1}) {
                    std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j) + sgn * static_cast<std::ptrdiff_t>(d);
                    const auto ni = static_cast<std::ptrdiff_t>(n);
                    if (g.periodic(a)) jj = ((jj % ni) + ni) % ni;
                    if (jj < 0 || jj >= ni) continue;
                    if (!valid[base + static_cast<std::size_t>(jj) * g.stride(a)]) ok = false;
                }
            }
        }
        if (ok) out.push_back(i);
    }
    return out;
}

}  // namespace

VacuumField::VacuumField(RealField l, VacuumSource s)
    : lambda(std::move(l)), source(s), valid(lambda.size(), 1) {}

std::size_t VacuumField::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

LogDensityProfile LogDensityProfile::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("Gaussian width must be positive");
    const double s2 = sigma * sigma;
    LogDensityProfile p;
    p.name = "gaussian";
    p.value = [s2](double x) { return -x * x / s2; };
    p.d1 = [s2](double x) { return -2.0 * x / s2; };
    p.d2 = [s2](double) { return -2.0 / s2; };
    p.d3 = [](double) { return 0.0; };
    return p;
}

PolarDecomposition LogDensityProfile::polar(const SpacetimeGrid& g, double hbar, double mass) const {
    const std::size_t x = spatial_axis(g);
    auto rho = RealField::sample(g, [&](auto c) { return std::exp(value(c[x])); });
    return PolarDecomposition(std::move(rho), RealField(g, 0.0), hbar, mass);
}

AnalyticPack LogDensityProfile::pack(const SpacetimeGrid& g) const {
    const std::size_t x = spatial_axis(g);
    AnalyticPack p;
    p.grad_log_rho.assign(2, RealField(g, 0.0));
    p.second_log_rho.assign(2, RealField(g, 0.0));
    p.grad_S.assign(2, RealField(g, 0.0));
    p.second_S.assign(2, RealField(g, 0.0));
    p.grad_qtilde.assign(2, RealField(g, 0.0));
    const double sx = g.inverse_metric(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double xi = g.coordinate_of(i, x);
        const double l1 = d1(xi);
        const double l2 = d2(xi);
        p.grad_log_rho[x][i] = l1;
        p.second_log_rho[x][i] = l2;
        p.grad_qtilde[x][i] = sx * (0.5 * d3(xi) + 0.5 * l1 * l2);
    }
    return p;
}

StaticLambdaOde::StaticLambdaOde(LogDensityProfile profile, double mass, double hbar, double s_x)
    : profile_(std::move(profile)), mass_(mass), hbar_(hbar), s_x_(s_x) {
    if (!(mass > 0.0)) throw InvalidArgument("the vacuum constraint needs mass > 0");
    if (!(hbar > 0.0)) throw InvalidArgument("hbar must be positive");
    if (s_x == 0.0) throw InvalidArgument("s_x must be nonzero");
}

double StaticLambdaOde::u(double x) const { return 0.5 * profile_.d1(x); }

double StaticLambdaOde::Q(double x) const {
    const double uu = u(x);
    return hbar_ * hbar_ / (mass_ * mass_) * s_x_ * (0.5 * profile_.d2(x) + uu * uu);
}

double StaticLambdaOde::rhs(double x, double lambda) const {
    const double k = mass_ * mass_ / (hbar_ * hbar_);
    return lambda * (s_x_ * k * (1.0 - Q(x)) - 0.5 * profile_.d2(x)) / u(x);
}

double StaticLambdaOde::integrate(double x_from, double lambda_from, double x_to, std::size_t steps) const {
    if (steps == 0) throw InvalidArgument("RK4 needs at least one step");
    const double h = (x_to - x_from) / static_cast<double>(steps);
    double y = lambda_from;
    for (std::size_t n = 0; n < steps; ++n) {
        const double x = x_from + static_cast<double>(n) * h;
        const double k1 = rhs(x, y);
        const double k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = rhs(x + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

std::vector<double> StaticLambdaOde::singular_points(double lo, double hi, const SingularityThresholds& t,
                                                     std::size_t samples) const {
    std::vector<double> out;
    const double h = (hi - lo) / static_cast<double>(samples);
    auto near = [&](double x) { return std::abs(u(x)) < t.delta_u || std::abs(1.0 - Q(x)) < t.delta_Q; };
    double prev_u = u(lo);
    double prev_q = 1.0 - Q(lo);
    if (near(lo)) out.push_back(lo);
    for (std::size_t k = 1; k <= samples; ++k) {
        const double x = k == samples ? hi : lo + static_cast<double>(k) * h;
        const double cu = u(x);
        const double cq = 1.0 - Q(x);
        const bool crossed = (prev_u < 0.0) != (cu < 0.0) || (prev_q < 0.0) != (cq < 0.0);
        if (crossed) {
            out.push_back(x - 0.5 * h);
        } else if (near(x) && (out.empty() || out.back() < x - 2.0 * h)) {
            out.push_back(x);
        }
        prev_u = cu;
        prev_q = cq;
    }
    return out;
}

double gaussian_lambda_exact(double x, double sigma, double mass, double hbar, double x0, double lambda0) {
    const double a = sigma * sigma * mass * mass / (hbar * hbar) - 2.0;
    const double s2 = sigma * sigma;
    auto shape = [&](double y) { return a * std::log(y) + y * y / (2.0 * s2); };
    return lambda0 * std::exp(shape(x) - shape(x0));
}

VacuumField solve_lambda_static_1d(const SpacetimeGrid& grid, const LogDensityProfile& profile,
                                   const VacuumSource& source, const StaticSolveOptions& options) {
    const std::size_t xa = spatial_axis(grid);
    const double lo = options.domain_lo;
    const double hi = options.domain_hi;
    if (!(lo < hi)) throw InvalidArgument("lambda domain must satisfy lo < hi");
    if (!(source.x0 >= lo && source.x0 <= hi)) throw InvalidArgument("anchor x0 must lie inside the domain");
    if (options.steps_per_cell == 0) throw InvalidArgument("steps_per_cell must be positive");

    const StaticLambdaOde ode(profile, source.mass, source.hbar, grid.inverse_metric(xa));
    const auto bad = ode.singular_points(lo, hi, options.thresholds);
    if (!bad.empty()) {
        throw SingularDomain("vacuum constraint singular inside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] at " + locus(bad) + "; split the domain");
    }

    // lambda at every distinct x sample inside the domain
    const std::size_t nx = grid.points(xa);
    std::vector<double> xs;
    for (std::size_t j = 0; j < nx; ++j) {
        const double x = grid.coordinate(xa, j);
        if (x >= lo - 1e-12 * (hi - lo) && x <= hi + 1e-12 * (hi - lo)) xs.push_back(x);
    }
    const double h_target = grid.spacing(xa) / static_cast<double>(options.steps_per_cell);
    auto steps_for = [&](double a, double b) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(b - a) / h_target - 1e-9)));
    };
    std::vector<double> values(xs.size());
    // forward sweep from x0
    {
        double x = source.x0, y = source.lambda0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (xs[k] < source.x0) continue;
            y = ode.integrate(x, y, xs[k], steps_for(x, xs[k]));
            x = xs[k];
            values[k] = y;
        }
    }
    // backward sweep
    {
        double x = source.x0, y = source.lambda0;
        for (std::size_t k = xs.size(); k-- > 0;) {
            if (xs[k] >= source.x0) continue;
            y = ode.integrate(x, y, xs[k], steps_for(x, xs[k]));
            x = xs[k];
            values[k] = y;
        }
    }

    VacuumField v(RealField(grid, 0.0), source);
    v.domain_lo = lo;
    v.domain_hi = hi;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.coordinate_of(i, xa);
        const auto it = std::find(xs.begin(), xs.end(), x);
        if (it == xs.end()) {
            v.valid[i] = 0;
            continue;
        }
        v.lambda[i] = values[static_cast<std::size_t>(it - xs.begin())];
        if (!std::isfinite(v.lambda[i])) {
            throw NumericalError("lambda overflowed at x = " + std::to_string(x));
        }
    }
    return v;
}

Residual lambda_residual(const VacuumField& v, const PolarCalculus& calc, const SingularityThresholds& t) {
    const auto& g = calc.grid();
    if (!(v.lambda.grid() == g)) throw InvalidArgument("lambda_residual: grid mismatch");
    const RealField Q = calc.quantum_potential_Q();
    const std::size_t xa = g.time_axis() == 0 ? 1 : 0;
    std::vector<double> bad;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!v.valid[i]) continue;
        const double gap = 1.0 - Q[i];
        if (std::abs(gap) < t.delta_Q) bad.push_back(g.coordinate_of(i, xa));
        for (std::size_t a = 0; a < g.dim(); ++a) {
            const std::size_t j = g.index_along(i, a);
            if (j + 1 >= g.points(a)) continue;
            const std::size_t nb = i + g.stride(a);
            if (v.valid[nb] && (gap < 0.0) != (1.0 - Q[nb] < 0.0)) {
                bad.push_back(0.5 * (g.coordinate_of(i, xa) + g.coordinate_of(nb, xa)));
            }
        }
    }
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        throw SingularDomain("|1 - Q| below threshold at " + locus(bad));
    }

    std::vector<RealField> flux;
    for (std::size_t mu = 0; mu < g.dim(); ++mu) {
        RealField f(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            f[i] = v.lambda[i] * g.inverse_metric(mu) * calc.grad_sqrt_rho()[mu][i] / calc.sqrt_rho()[i];
        }
        flux.push_back(std::move(f));
    }
    RealField div(g, 0.0);
    for (std::size_t mu = 0; mu < g.dim(); ++mu) div += partial(flux[mu], mu, calc.order());

    const double k = calc.hbar() * calc.hbar() / (calc.mass() * calc.mass());
    Residual r;
    for (auto i : safe_points(g, v.valid, stencil_radius(calc.order()), calc.margin())) {
        const double term = k / (1.0 - Q[i]) * div[i];
        r.abs = std::max(r.abs, std::abs(v.lambda[i] - term));
        r.scale = std::max({r.scale, std::abs(v.lambda[i]), std::abs(term)});
    }
    return r;
}

const char* to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

std::size_t VacuumMass::complex_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < complex_flag.size(); ++i) n += complex_flag[i] && valid[i];
    return n;
}

VacuumMass vacuum_mass(const PolarCalculus& calc, const VacuumField& v, bool include_conformal, Branch branch) {
    const auto& g = calc.grid();
    if (!(v.lambda.grid() == g)) throw InvalidArgument("vacuum_mass: grid mismatch");
    if (!(calc.mass() > 0.0)) throw InvalidArgument("vacuum_mass needs mass > 0");
    require_finite(v.lambda, "lambda");
    // lambda = 0 makes the bracket vanish, so the conformal form is 0 even
    // when Omega^2 is not representable.
    const auto lv = v.lambda.values();
    const bool zero_lambda = std::all_of(lv.begin(), lv.end(), [](double x) { return x == 0.0; });
    if (include_conformal && !zero_lambda) (void)calc.conformal();
    const RealField Q = calc.quantum_potential_Q();
    const ConformalState* c = calc.has_conformal() ? &calc.conformal() : nullptr;
    const double m = calc.mass();
    const double hbar = calc.hbar();
    const RealField box_lam = dalembertian(v.lambda, calc.order());
    const auto& rho = calc.polar().rho();

    VacuumMass vm{RealField(g), RealField(g), RealField(g), RealField(g), ComplexField(g),
                  std::vector<std::uint8_t>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0),
                  include_conformal, branch, c != nullptr};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<std::size_t> pts = safe_points(g, v.valid, stencil_radius(calc.order()), 0);
    const double sign = branch == Branch::plus ? 1.0 : -1.0;
    for (auto i : pts) {
        vm.valid[i] = 1;
        const double bracket = m * (1.0 - Q[i]) * v.lambda[i] - hbar * hbar / (2.0 * m) * box_lam[i];
        vm.m2_closed[i] = bracket / rho[i];
        vm.m2_conformal[i] = c ? bracket / (c->omega2[i] * rho[i]) : zero_lambda ? 0.0 : nan;
        vm.discrepancy[i] = vm.m2_closed[i] - vm.m2_conformal[i];
        vm.m2[i] = include_conformal ? vm.m2_conformal[i] : vm.m2_closed[i];
        if (vm.m2[i] < 0.0) {
            vm.complex_flag[i] = 1;
            vm.M[i] = cplx(0.0, std::sqrt(-vm.m2[i]));
        } else {
            vm.M[i] = cplx(sign * std::sqrt(vm.m2[i]), 0.0);
        }
    }
    return vm;
}

ComplexField vacuum_mass_kg_field(const PolarCalculus& calc, const VacuumMass& vm) {
    if (!(vm.m2.grid() == calc.grid())) throw InvalidArgument("vacuum_mass_kg_field: grid mismatch");
    ComplexField out = kg::box_D(calc);
    const double h2 = calc.hbar() * calc.hbar();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (vm.m2[i] / h2) * calc.phi()[i];
    return out;
}

ConstancyReport mass_constancy_residual(const VacuumMass& vm, StencilOrder order) {
    const auto& g = vm.m2.grid();
    ConstancyReport r;
    std::vector<std::uint8_t> real(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!vm.valid[i]) continue;
        if (vm.complex_flag[i]) ++r.complex_points;
        else real[i] = 1;
    }
    r.restricted = r.complex_points > 0;
    const RealField M = map(vm.m2, [](double v) { return std::sqrt(std::max(v, 0.0)); });
    const RealCovector dM = gradient(M, order);
    for (auto i : safe_points(g, real, stencil_radius(order), 0)) {
        ++r.evaluated_points;
        for (std::size_t mu = 0; mu < g.dim(); ++mu) r.max_gradient = std::max(r.max_gradient, std::abs(dM[mu][i]));
    }
    return r;
}

// ---- m -> 0 study ---------------------------------------------------------

const char* to_string(LambdaProtocol p) {
    switch (p) {
        case LambdaProtocol::zero: return "zero";
        case LambdaProtocol::fixed: return "fixed";
        default: return "resolved";
    }
}

LambdaProtocol protocol_from_string(const std::string& s) {
    if (s == "zero") return LambdaProtocol::zero;
    if (s == "fixed") return LambdaProtocol::fixed;
    if (s == "resolved") return LambdaProtocol::resolved;
    throw InvalidArgument("unknown lambda protocol '" + s + "' (expected zero, fixed or resolved)");
}

const char* to_string(LimitStatus s) {
    switch (s) {
        case LimitStatus::constant: return "constant";
        case LimitStatus::converging: return "converging";
        case LimitStatus::diverging: return "diverging";
        case LimitStatus::undetermined: return "undetermined";
        default: return "insufficient";
    }
}

LimitEstimate extrapolate_limit(const std::vector<double>& y, double ratio, double zero_tolerance) {
    LimitEstimate e;
    if (y.size() < 3) return e;
    e.monotone = true;
    for (std::size_t k = 2; k < y.size(); ++k) {
        if ((y[k] - y[k - 1]) * (y[k - 1] - y[k - 2]) < 0.0) e.monotone = false;
    }

    auto triple = [&](std::size_t k, double& order, double& limit) -> LimitStatus {
        const double d1 = y[k - 1] - y[k - 2];
        const double d2 = y[k] - y[k - 1];
        const double size = std::max({std::abs(y[k]), std::abs(y[k - 1]), std::abs(y[k - 2]), zero_tolerance});
        if (std::abs(d1) <= zero_tolerance * size && std::abs(d2) <= zero_tolerance * size) {
            limit = y[k];
            order = 0.0;
            return LimitStatus::constant;
        }
        const double q = d1 / d2;
        if (!(q > 0.0) || !std::isfinite(q)) {
            limit = y[k];
            return LimitStatus::undetermined;
        }
        order = std::log(q) / std::log(1.0 / ratio);
        if (!(order > 0.0)) {
            limit = y[k];
            return LimitStatus::diverging;
        }
        const double rp = std::pow(ratio, order);
        limit = y[k] + d2 * rp / (1.0 - rp);
        return LimitStatus::converging;
    };

    const std::size_t k = y.size() - 1;
    e.status = triple(k, e.order, e.limit);
    if (e.status == LimitStatus::converging) {
        double o2 = 0.0, l2 = 0.0;
        if (y.size() >= 4 && triple(k - 1, o2, l2) == LimitStatus::converging) {
            e.uncertainty = std::abs(e.limit - l2);
        } else {
            e.uncertainty = std::abs(y[k] - y[k - 1]);
        }
    } else if (e.status == LimitStatus::constant) {
        e.uncertainty = std::abs(y[k] - y[k - 1]);
    } else {
        e.uncertainty = std::numeric_limits<double>::infinity();
    }
    if (e.status == LimitStatus::constant || e.status == LimitStatus::converging) {
        e.consistent_with_zero = std::abs(e.limit) <= std::max(e.uncertainty, zero_tolerance);
    }
    return e;
}

SpacetimeGrid study_grid(const NeutrinoStudyConfig& cfg) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 5, cfg.solve.domain_lo, cfg.solve.domain_hi, cfg.points,
                                         Boundary::one_sided);
}

NeutrinoReport neutrino_limit_study(const NeutrinoStudyConfig& cfg) {
    const auto& ms = cfg.masses;
    if (ms.size() < 3) throw InvalidArgument("the m -> 0 study needs at least three masses");
    for (double m : ms) {
        if (!(m > 0.0)) throw InvalidArgument("masses must be positive; m = 0 is reached only as a limit");
    }
    const double ratio = ms[1] / ms[0];
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("mass sequence must be strictly decreasing");
    for (std::size_t k = 1; k < ms.size(); ++k) {
        if (std::abs(ms[k] / ms[k - 1] - ratio) > 1e-9 * ratio) {
            throw InvalidArgument("mass sequence must be geometric (constant ratio)");
        }
    }
    if (cfg.probes.empty()) throw InvalidArgument("the m -> 0 study needs at least one probe point");

    const SpacetimeGrid g = study_grid(cfg);
    const std::size_t xa = spatial_axis(g);
    const std::size_t probe_t = g.points(g.time_axis()) / 2;
    std::vector<std::size_t> probe_idx;
    for (double xp : cfg.probes) {
        if (xp < cfg.solve.domain_lo || xp > cfg.solve.domain_hi) {
            throw InvalidArgument("probe x = " + std::to_string(xp) + " lies outside the domain");
        }
        const auto j = static_cast<std::size_t>(std::lround((xp - g.axis(xa).lower) / g.spacing(xa)));
        std::vector<std::size_t> idx(2);
        idx[g.time_axis()] = probe_t;
        idx[xa] = j;
        probe_idx.push_back(g.flat_index(idx));
    }

    NeutrinoReport rep;
    rep.ratio = ratio;
    std::optional<VacuumField> held;
    for (double m : ms) {
        NeutrinoRow row;
        row.mass = m;
        try {
            VacuumSource src{m, cfg.hbar, cfg.lambda0, cfg.x0};
            VacuumField v(RealField(g, 0.0), src);
            if (cfg.protocol == LambdaProtocol::zero || cfg.lambda0 == 0.0) {
                v.domain_lo = cfg.solve.domain_lo;
                v.domain_hi = cfg.solve.domain_hi;
            } else if (cfg.protocol == LambdaProtocol::fixed) {
                if (!held) held = solve_lambda_static_1d(g, cfg.profile, src, cfg.solve);
                v = *held;
            } else {
                v = solve_lambda_static_1d(g, cfg.profile, src, cfg.solve);
            }
            const auto p = cfg.profile.polar(g, cfg.hbar, m);
            const auto calc = PolarCalculus::stencil(p, cfg.order);
            const auto vm = vacuum_mass(calc, v, cfg.include_conformal, cfg.branch);
            for (auto i : probe_idx) {
                if (!vm.valid[i]) throw NumericalError("probe point outside the valid vacuum-mass region");
                row.m2.push_back(vm.m2[i]);
                row.M.push_back(vm.M[i]);
            }
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
            row.m2.clear();
            row.M.clear();
        }
        rep.rows.push_back(std::move(row));
    }

    for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
        // trailing run of successful rows with real M
        std::vector<double> y;
        for (const auto& row : rep.rows) {
            if (row.failed || row.M[k].imag() != 0.0) {
                y.clear();
                continue;
            }
            y.push_back(row.M[k].real());
        }
        LimitEstimate e = extrapolate_limit(y, ratio, cfg.zero_tolerance);
        e.probe = cfg.probes[k];
        rep.limits.push_back(e);
    }
    return rep;
}

}  // namespace vdlab::vacuum
