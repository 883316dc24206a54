#include "vdlab/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <random>

#include "vdlab/dirac.hpp"
#include "vdlab/kgops.hpp"
#include "vdlab/manufactured.hpp"

namespace vdlab::runner {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<std::uint64_t> corpus_seeds(const RunConfig& cfg) {
    std::vector<std::uint64_t> out;
    for (std::size_t j = 0; j < cfg.numerics.corpus_size; ++j) out.push_back(cfg.seed + j);
    return out;
}

ManufacturedFields corpus_fields(const RunConfig& cfg, std::uint64_t seed, const SpacetimeGrid& g) {
    return generate_manufactured_fields(seed, g, cfg.numerics.smoothness, cfg.physics.hbar, cfg.physics.mass);
}

bool analytic_mode(const RunConfig& cfg) { return cfg.numerics.derivative_mode == "analytic"; }

// Successive ratios e[k-1] / e[k].
std::vector<double> ratios(const std::vector<double>& e) {
    std::vector<double> out;
    for (std::size_t k = 1; k < e.size(); ++k) out.push_back(e[k - 1] / e[k]);
    return out;
}

void append(std::vector<double>& to, const std::vector<double>& from) { to.insert(to.end(), from.begin(), from.end()); }

// ---- shared vacuum-field setup ---------------------------------------------

struct VacuumSetup {
    vacuum::LogDensityProfile profile;
    SpacetimeGrid grid;
    vacuum::VacuumField field;
    PolarDecomposition polar;
};

vacuum::StaticSolveOptions solve_options(const RunConfig& cfg) {
    vacuum::StaticSolveOptions o;
    o.domain_lo = cfg.physics.domain_lo;
    o.domain_hi = cfg.physics.domain_hi;
    o.steps_per_cell = cfg.numerics.steps_per_cell;
    o.thresholds = {cfg.numerics.delta_u, cfg.numerics.delta_Q};
    return o;
}

SpacetimeGrid static_grid(const RunConfig& cfg) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 5, cfg.physics.domain_lo, cfg.physics.domain_hi,
                                         cfg.numerics.lambda_points, Boundary::one_sided);
}

VacuumSetup vacuum_setup(const RunConfig& cfg, double lambda_scale = 1.0) {
    auto profile = vacuum::LogDensityProfile::gaussian(cfg.physics.sigma);
    const auto g = static_grid(cfg);
    const vacuum::VacuumSource src{cfg.physics.mass, cfg.physics.hbar, lambda_scale * cfg.physics.lambda0,
                                   cfg.physics.x0};
    auto field = vacuum::solve_lambda_static_1d(g, profile, src, solve_options(cfg));
    auto polar = profile.polar(g, cfg.physics.hbar, cfg.physics.mass);
    return {std::move(profile), g, std::move(field), std::move(polar)};
}

PolarCalculus vacuum_calc(const RunConfig& cfg, const VacuumSetup& s) {
    return analytic_mode(cfg) ? PolarCalculus::analytic(s.polar, s.profile.pack(s.grid), cfg.numerics.order)
                              : PolarCalculus::stencil(s.polar, cfg.numerics.order);
}

// max |D_mu D^mu phi + (M^2/hbar^2) phi - general KG residual| relative to the
// largest term, over points where the vacuum mass is defined.
double vacuum_identity_defect(const PolarCalculus& calc, const VacuumSetup& s) {
    const auto vm = vacuum::vacuum_mass(calc, s.field, true);
    const auto lhs = vacuum::vacuum_mass_kg_field(calc, vm);
    const auto gk = kg::general_kg_residual(calc, s.field.lambda);
    const auto bd = kg::box_D(calc);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        if (!vm.valid[i]) continue;
        diff = std::max(diff, std::abs(lhs[i] - gk.field[i]));
        scale = std::max({scale, std::abs(lhs[i]), std::abs(gk.field[i]), std::abs(bd[i])});
    }
    return scale > 0.0 ? diff / scale : diff;
}

double zero_lambda_mass(const PolarCalculus& calc, const RunConfig& cfg) {
    const vacuum::VacuumField zero(RealField(calc.grid(), 0.0));
    const auto vm = vacuum::vacuum_mass(calc, zero, cfg.physics.include_conformal, cfg.physics.branch);
    double worst = 0.0;
    for (std::size_t i = 0; i < vm.M.size(); ++i) {
        if (vm.valid[i]) worst = std::max(worst, std::abs(vm.M[i]));
    }
    return worst;
}

// ---- Clifford algebra ------------------------------------------------------

struct CliffordMeasure {
    double anticommutator = 0.0;
    double hermiticity = 0.0;
    double dyadic_square = 0.0;
    double real_square = 0.0;  // relative to |a|^2
};

CliffordMeasure clifford_measure(std::uint64_t seed, int samples) {
    CliffordMeasure out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> ticks(-192, 192);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto d : {dirac::Dim::two, dirac::Dim::four}) {
        const auto rep = dirac::build_gamma(d);
        out.anticommutator = std::max(out.anticommutator, rep.clifford_defect());
        out.hermiticity = std::max(out.hermiticity, rep.hermiticity_defect());
        const auto n = static_cast<Eigen::Index>(rep.size());
        const dirac::Matrix I = dirac::Matrix::Identity(n, n);
        for (int k = 0; k < samples; ++k) {
            std::vector<double> a(rep.count()), b(rep.count());
            double norm2 = 0.0;
            for (std::size_t mu = 0; mu < a.size(); ++mu) {
                a[mu] = ticks(rng) / 64.0;
                b[mu] = u(rng);
                norm2 += b[mu] * b[mu];
            }
            const auto sa = rep.slash(a);
            const auto sb = rep.slash(b);
            out.dyadic_square = std::max(out.dyadic_square, (sa * sa - rep.square(a) * I).cwiseAbs().maxCoeff());
            out.real_square =
                std::max(out.real_square, (sb * sb - rep.square(b) * I).cwiseAbs().maxCoeff() / norm2);
        }
    }
    return out;
}

// ---- experiments -----------------------------------------------------------

ExperimentResult identity_suite(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = "analytic+stencil";
    const auto g = cfg.grid.build(0);
    const auto order = cfg.numerics.order;
    Table t{"identity_residuals.csv", {"id", "seed", "abs", "scale", "relative"}, {}};
    auto row = [&](const std::string& id, long long seed, const Residual& res) {
        t.rows.push_back({id, seed, res.abs, res.scale, res.relative()});
    };

    double shift = 0.0, phase = 0.0;
    for (auto seed : corpus_seeds(cfg)) {
        const auto mf = corpus_fields(cfg, seed, g);
        const auto ca = PolarCalculus::analytic(mf.polar, mf.pack, order);
        const auto sr = kg::shift_residual(ca);
        const auto s = static_cast<long long>(seed);
        row("shift.box", s, sr.box);
        row("shift.gradient-minus", s, sr.gradient_minus);
        row("shift.gradient-plus", s, sr.gradient_plus);
        shift = std::max({shift, sr.box.relative(), sr.gradient_minus.relative(), sr.gradient_plus.relative()});
        const auto pr = phase_identity_residual(ca);
        row("phase-identity", s, pr);
        phase = std::max(phase, pr.relative());
    }
    r.checks.push_back(Check::upper("shift.analytic", "shift theorem with analytic derivatives, relative", shift,
                                    cfg.numerics.tol_analytic));
    r.checks.push_back(Check::upper("phase-identity.analytic",
                                    "(1/2)(dphi/phi - dphi*/phi*) = (i/hbar) dS with analytic derivatives, relative",
                                    phase, cfg.numerics.tol_analytic));

    const std::vector<double> p{cfg.physics.momentum};
    const auto pw = plane_wave_fields(g, p, cfg.physics.hbar, cfg.physics.mass);
    const auto pc = PolarCalculus::analytic(pw.polar, pw.pack, order);
    const auto pol = kg::kg_residual_polar(pc);
    const auto wave = kg::kg_residual_wave(pc);
    const double boxd = max_abs(kg::box_D(pc));
    row("plane-wave.motion", 0, pol.motion_norm);
    row("plane-wave.continuity", 0, pol.continuity_norm);
    row("plane-wave.wave", 0, wave.norm);
    row("plane-wave.box-D", 0, Residual{boxd, 0.0});
    r.checks.push_back(Check::upper("plane-wave.reduction", "polar, wave and box_D residuals of an on-shell plane wave",
                                    std::max({pol.motion_norm.abs, pol.continuity_norm.abs, wave.norm.abs, boxd}),
                                    cfg.numerics.tol_plane_wave));

    const auto cl = clifford_measure(cfg.seed, 100);
    r.checks.push_back(Check::upper("clifford.anticommutator", "{gamma^mu, gamma^nu} - 2 eta^{mu nu} I, 1+1 and 3+1",
                                    std::max(cl.anticommutator, cl.hermiticity), 0.0));
    r.checks.push_back(Check::upper("clifford.slash-square", "(gamma.a)^2 - (a.a) I on 100 dyadic covectors per set",
                                    cl.dyadic_square, 0.0));
    r.diagnostics["slash_square_real_relative"] = cl.real_square;

    std::vector<double> sq_ratios;
    for (auto seed : corpus_seeds(cfg)) {
        std::vector<double> e;
        for (int level = 0; level < cfg.refine_levels; ++level) {
            const auto gl = cfg.grid.build(level);
            const auto mf = corpus_fields(cfg, seed, gl);
            const auto psi = dirac::manufactured_spinor(mf.polar, seed + 1000, cfg.numerics.smoothness);
            const auto res = dirac::square_dirac_check(psi, PolarCalculus::stencil(mf.polar, order));
            row("dirac.squaring.level" + std::to_string(level), static_cast<long long>(seed), res);
            e.push_back(res.abs);
        }
        append(sq_ratios, ratios(e));
    }
    r.checks.push_back(Check::within("dirac.squaring", "(i hbar gamma D)^2 psi + hbar^2 D.D psi refinement ratios",
                                     sq_ratios, cfg.numerics.ratio_lo, cfg.numerics.ratio_hi));

    const auto vs = vacuum_setup(cfg);
    const auto vc = vacuum_calc(cfg, vs);
    r.checks.push_back(Check::upper("vacuum-mass.identity",
                                    "D.D phi + (M^2/hbar^2) phi against the general KG residual, relative",
                                    vacuum_identity_defect(vc, vs), cfg.numerics.tol_identity));
    r.checks.push_back(Check::upper("vacuum-mass.zero-lambda", "max |M| for lambda = 0", zero_lambda_mass(vc, cfg), 0.0));
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult convergence_suite(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = "stencil (analytic reference)";
    const auto order = cfg.numerics.order;
    Table t{"convergence.csv", {"level", "h", "residual", "ratio", "quantity", "seed"}, {}};
    std::vector<double> shift_r, phase_r, sq_r;
    double shift_a = 0.0, phase_a = 0.0;
    for (auto seed : corpus_seeds(cfg)) {
        std::vector<double> es, ep, eq;
        for (int level = 0; level < cfg.refine_levels; ++level) {
            const auto g = cfg.grid.build(level);
            const auto mf = corpus_fields(cfg, seed, g);
            const auto cs = PolarCalculus::stencil(mf.polar, order);
            const auto ca = PolarCalculus::analytic(mf.polar, mf.pack, order);
            es.push_back(kg::shift_residual(cs).box.abs);
            ep.push_back(phase_identity_residual(cs).abs);
            const auto psi = dirac::manufactured_spinor(mf.polar, seed + 1000, cfg.numerics.smoothness);
            eq.push_back(dirac::square_dirac_check(psi, cs).abs);
            const auto sa = kg::shift_residual(ca);
            shift_a = std::max({shift_a, sa.box.relative(), sa.gradient_minus.relative(), sa.gradient_plus.relative()});
            phase_a = std::max(phase_a, phase_identity_residual(ca).relative());
            const double h = g.spacing(1);
            for (auto [name, e] : {std::pair{"shift", &es}, std::pair{"phase-identity", &ep},
                                   std::pair{"dirac-squaring", &eq}}) {
                const double ratio = level == 0 ? kNaN : (*e)[level - 1] / (*e)[level];
                t.rows.push_back({static_cast<long long>(level), h, e->back(), ratio, std::string(name),
                                  static_cast<long long>(seed)});
            }
        }
        append(shift_r, ratios(es));
        append(phase_r, ratios(ep));
        append(sq_r, ratios(eq));
    }
    const double lo = cfg.numerics.ratio_lo, hi = cfg.numerics.ratio_hi;
    r.checks.push_back(Check::within("shift.ratio", "max |Qtilde phi - D.D phi| refinement ratios", shift_r, lo, hi));
    r.checks.push_back(Check::upper("shift.analytic", "shift theorem with analytic derivatives on every level, relative",
                                    shift_a, cfg.numerics.tol_analytic));
    r.checks.push_back(Check::within("phase-identity.ratio", "phase identity refinement ratios", phase_r, lo, hi));
    r.checks.push_back(Check::upper("phase-identity.analytic", "phase identity with analytic derivatives, relative",
                                    phase_a, cfg.numerics.tol_analytic));
    r.checks.push_back(Check::within("dirac.squaring", "squared Dirac operator refinement ratios", sq_r, lo, hi));
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult lambda_profile(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = "rk4";
    const auto& ph = cfg.physics;
    const vacuum::StaticLambdaOde ode(vacuum::LogDensityProfile::gaussian(ph.sigma), ph.mass, ph.hbar);
    const auto sing = ode.singular_points(ph.domain_lo, ph.domain_hi, {cfg.numerics.delta_u, cfg.numerics.delta_Q});
    if (!sing.empty()) {
        throw SingularDomain("vacuum constraint is singular at x = " + format_number(sing.front()) +
                             " inside [" + format_number(ph.domain_lo) + ", " + format_number(ph.domain_hi) + "]");
    }
    const double anchor = ph.lambda0 == 0.0 ? 1.0 : ph.lambda0;
    const double exact = vacuum::gaussian_lambda_exact(ph.domain_hi, ph.sigma, ph.mass, ph.hbar, ph.domain_lo, anchor);
    std::vector<double> e;
    for (std::size_t n = 20; n <= 320; n *= 2) e.push_back(std::abs(ode.integrate(ph.domain_lo, anchor, ph.domain_hi, n) - exact));
    r.checks.push_back(Check::within("lambda.rk4-order", "step-halving error ratios, 20 to 320 steps", ratios(e),
                                     cfg.numerics.rk4_ratio_lo, cfg.numerics.rk4_ratio_hi));
    r.diagnostics["rk4_errors"] = e;

    const double there = ode.integrate(ph.domain_lo, anchor, ph.domain_hi, 400);
    const double back = ode.integrate(ph.domain_hi, there, ph.domain_lo, 400);
    r.checks.push_back(Check::upper("lambda.closure", "forward-backward integration, relative",
                                    std::abs(back - anchor) / std::abs(anchor), cfg.numerics.tol_closure));

    const auto s1 = vacuum_setup(cfg);
    const auto s2 = vacuum_setup(cfg, 2.0);
    double hom = 0.0, hs = 0.0;
    for (std::size_t i = 0; i < s1.grid.size(); ++i) {
        hom = std::max(hom, std::abs(s2.field.lambda[i] - 2.0 * s1.field.lambda[i]));
        hs = std::max(hs, std::abs(2.0 * s1.field.lambda[i]));
    }
    r.checks.push_back(Check::upper("lambda.homogeneity", "lambda(2 lambda0) - 2 lambda(lambda0), relative",
                                    hs > 0.0 ? hom / hs : hom, std::numeric_limits<double>::epsilon()));

    Table t{"lambda_profile.csv", {"x", "lambda", "lambda_exact", "rel_error", "Q", "u"}, {}};
    double worst = 0.0;
    const auto& g = s1.grid;
    for (std::size_t j = 0; j < g.points(1); ++j) {
        const std::size_t i = j * g.stride(1);
        if (!s1.field.valid[i]) continue;
        const double x = g.coordinate(1, j);
        const double ref = vacuum::gaussian_lambda_exact(x, ph.sigma, ph.mass, ph.hbar, ph.x0, ph.lambda0);
        const double rel = std::abs(s1.field.lambda[i] - ref) / std::max(std::abs(ref), 1e-300);
        if (ref != 0.0) worst = std::max(worst, rel);
        t.rows.push_back({x, s1.field.lambda[i], ref, ref == 0.0 ? std::abs(s1.field.lambda[i]) : rel, ode.Q(x), ode.u(x)});
    }
    r.checks.push_back(Check::upper("lambda.closed-form", "grid solve against the Gaussian closed form, relative", worst,
                                    cfg.numerics.tol_lambda));
    const auto calc = vacuum_calc(cfg, s1);
    r.diagnostics["lambda_residual"] =
        vacuum::lambda_residual(s1.field, calc, {cfg.numerics.delta_u, cfg.numerics.delta_Q}).relative();
    r.derivative_mode = std::string("rk4, ") + to_string(calc.mode());
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult mass_landscape(const RunConfig& cfg) {
    ExperimentResult r;
    const auto s = vacuum_setup(cfg);
    const auto calc = vacuum_calc(cfg, s);
    r.derivative_mode = to_string(calc.mode());
    const auto vm = vacuum::vacuum_mass(calc, s.field, cfg.physics.include_conformal, cfg.physics.branch);

    Table t{"mass_landscape.csv", {"x", "m2_closed", "m2_conformal", "discrepancy", "M", "M_imag", "complex_flag"}, {}};
    const auto& g = s.grid;
    const std::size_t row = g.points(0) / 2;
    for (std::size_t j = 0; j < g.points(1); ++j) {
        const std::size_t i = row * g.stride(0) + j * g.stride(1);
        if (!vm.valid[i]) continue;
        t.rows.push_back({g.coordinate(1, j), vm.m2_closed[i], vm.m2_conformal[i], vm.discrepancy[i], vm.M[i].real(),
                          vm.M[i].imag(), static_cast<long long>(vm.complex_flag[i])});
    }

    r.checks.push_back(Check::upper("vacuum-mass.identity",
                                    "D.D phi + (M^2/hbar^2) phi against the general KG residual, relative",
                                    vacuum_identity_defect(calc, s), cfg.numerics.tol_identity));
    r.checks.push_back(Check::upper("vacuum-mass.zero-lambda", "max |M| for lambda = 0", zero_lambda_mass(calc, cfg), 0.0));
    if (vm.conformal_available) {
        const auto& omega2 = calc.conformal().omega2;
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!vm.valid[i]) continue;
            const double expect = vm.m2_closed[i] * (omega2[i] - 1.0) / omega2[i];
            const double scale = std::max({1.0, std::abs(vm.m2_closed[i]), std::abs(vm.m2_conformal[i])});
            worst = std::max(worst, std::abs(vm.discrepancy[i] - expect) / scale);
        }
        r.checks.push_back(Check::upper("vacuum-mass.conformal-relation",
                                        "closed minus conformal form equals m2_closed (Omega^2 - 1) / Omega^2",
                                        worst, cfg.numerics.tol_identity));
    }
    const auto cr = vacuum::mass_constancy_residual(vm, cfg.numerics.order);
    r.diagnostics["complex_points"] = vm.complex_count();
    r.diagnostics["constancy_max_gradient"] = cr.max_gradient;
    r.diagnostics["constancy_points"] = cr.evaluated_points;
    r.diagnostics["conformal_available"] = vm.conformal_available;
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult neutrino_limit(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = to_string(DerivativeMode::stencil);
    const auto& ph = cfg.physics;
    vacuum::NeutrinoStudyConfig sc;
    sc.profile = vacuum::LogDensityProfile::gaussian(ph.sigma);
    sc.points = cfg.numerics.lambda_points;
    sc.hbar = ph.hbar;
    sc.lambda0 = ph.lambda0;
    sc.x0 = ph.x0;
    sc.masses = ph.masses;
    sc.probes = ph.probes;
    sc.protocol = ph.protocol;
    sc.include_conformal = ph.include_conformal;
    sc.branch = ph.branch;
    sc.solve = solve_options(cfg);
    sc.order = cfg.numerics.order;
    const auto rep = vacuum::neutrino_limit_study(sc);

    Table t{"neutrino.csv", {"m"}, {}};
    for (std::size_t k = 0; k < ph.probes.size(); ++k) t.columns.push_back("M_probe" + std::to_string(k + 1));
    t.columns.push_back("kind");
    std::size_t ok = 0;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : rep.rows) {
        std::vector<Cell> cells{row.mass};
        bool complex = false;
        for (std::size_t k = 0; k < ph.probes.size(); ++k) {
            cells.push_back(row.failed ? kNaN : row.M[k].real());
            if (!row.failed && row.M[k].imag() != 0.0) complex = true;
        }
        cells.push_back(std::string(row.failed ? "failed" : complex ? "complex" : "sample"));
        t.rows.push_back(std::move(cells));
        if (!row.failed) ++ok;
        rows.push_back({{"mass", row.mass}, {"failed", row.failed}, {"error", row.error}});
    }
    std::vector<Cell> extrap{0.0};
    std::size_t classified = 0;
    auto limits = nlohmann::ordered_json::array();
    for (const auto& l : rep.limits) {
        const bool have = l.status == vacuum::LimitStatus::constant || l.status == vacuum::LimitStatus::converging ||
                          l.status == vacuum::LimitStatus::diverging;
        if (have) ++classified;
        extrap.push_back(have && l.status != vacuum::LimitStatus::diverging ? l.limit : kNaN);
        limits.push_back({{"probe", l.probe},
                          {"status", to_string(l.status)},
                          {"order", l.order},
                          {"limit", l.limit},
                          {"uncertainty", l.uncertainty},
                          {"consistent_with_zero", l.consistent_with_zero},
                          {"monotone", l.monotone}});
    }
    extrap.push_back(std::string("extrapolated"));
    t.rows.push_back(std::move(extrap));

    r.checks.push_back(Check::within("neutrino.rows", "masses with an evaluable vacuum mass (3 needed)",
                                     {static_cast<double>(ok)}, 3.0, static_cast<double>(ph.masses.size())));
    r.checks.push_back(Check::within("neutrino.classified", "probes whose m -> 0 behaviour was classified",
                                     {static_cast<double>(classified)}, static_cast<double>(ph.probes.size()),
                                     static_cast<double>(ph.probes.size())));
    r.diagnostics["mass_ratio"] = rep.ratio;
    r.diagnostics["protocol"] = to_string(ph.protocol);
    r.diagnostics["rows"] = rows;
    r.diagnostics["limits"] = limits;
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult dispersion_scan(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = "eigen (momentum space), stencil (grid)";
    const auto& ph = cfg.physics;
    Table t{"dispersion.csv", {"k", "E_numeric", "E_closed", "abs_error", "m", "M"}, {}};
    double worst = 0.0;
    for (auto [m, M] : {std::pair{ph.mass, ph.vacuum_mass}, std::pair{0.0, ph.vacuum_mass}, std::pair{ph.mass, -ph.mass}}) {
        for (std::size_t j = 0; j < ph.k_points; ++j) {
            const double k = ph.k_min + (ph.k_max - ph.k_min) * static_cast<double>(j) / static_cast<double>(ph.k_points - 1);
            const auto p = dirac::plane_wave_dispersion(k, m, M);
            worst = std::max(worst, p.abs_error);
            t.rows.push_back({p.k, p.numeric, p.closed, p.abs_error, m, M});
        }
    }
    r.checks.push_back(Check::upper("dispersion.closed-form", "2x2 eigenvalue against sqrt(k^2 + (m + M)^2)", worst,
                                    cfg.numerics.tol_dispersion));

    // 3+1: the Hamiltonian spectrum is {-E, -E, E, E}
    const auto rep4 = dirac::build_gamma(dirac::Dim::four);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(ph.k_min, ph.k_max);
    double worst4 = 0.0;
    for (int n = 0; n < 50; ++n) {
        const std::vector<double> k{u(rng), u(rng), u(rng)};
        const double mt = ph.mass + ph.vacuum_mass;
        const double E = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mt * mt);
        Eigen::SelfAdjointEigenSolver<dirac::Matrix> es(dirac::momentum_hamiltonian(k, mt, rep4), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        worst4 = std::max({worst4, std::abs(ev(0) + E), std::abs(ev(1) + E), std::abs(ev(2) - E), std::abs(ev(3) - E)});
    }
    r.checks.push_back(Check::upper("dispersion.four-component", "3+1 Hamiltonian eigenvalues against +-E", worst4,
                                    cfg.numerics.tol_dispersion * 10.0));

    // grid operator with a constant vacuum mass
    std::vector<double> e;
    for (int level = 0; level < cfg.refine_levels; ++level) {
        const auto g = cfg.grid.build(level);
        const PolarDecomposition flat(RealField(g, 1.0), RealField(g, 0.0), ph.hbar, ph.mass);
        const auto calc = PolarCalculus::stencil(flat, cfg.numerics.order);
        const vacuum::VacuumField v(RealField(g, ph.vacuum_mass * ph.vacuum_mass / ph.mass));
        const auto vm = vacuum::vacuum_mass(calc, v, true, ph.vacuum_mass < 0.0 ? vacuum::Branch::minus : vacuum::Branch::plus);
        const auto psi = dirac::free_plane_wave(g, ph.momentum, ph.mass + ph.vacuum_mass, ph.hbar);
        e.push_back(dirac::dirac_residual(psi, calc, &vm, {}).psi_norm.abs);
    }
    r.diagnostics["grid_residuals"] = e;
    r.checks.push_back(Check::within("dispersion.grid-order", "assigned Dirac residual of the shifted plane wave, ratios",
                                     ratios(e), cfg.numerics.ratio_lo, cfg.numerics.ratio_hi));
    r.tables.push_back(std::move(t));
    return r;
}

ExperimentResult action_gradient(const RunConfig& cfg) {
    ExperimentResult r;
    r.derivative_mode = to_string(DerivativeMode::stencil);
    const auto g = cfg.grid.build(0);
    const auto& ph = cfg.physics;
    const auto order = cfg.numerics.order;
    kg::ActionParams a{ph.kappa, ph.hbar, ph.mass, 0.0};

    const auto mf = corpus_fields(cfg, cfg.seed, g);
    const auto c = quantum_potential(mf.polar, order);
    // Omega^2 off the constraint and a smooth lambda so every term contributes
    const auto offset = RealField::sample(g, [](auto x) { return 0.1 * std::cos(x[1]) * x[0]; });
    const auto loose = conformal_from_Q(c.qtilde, c.Q + offset);
    const auto env = generate_manufactured_fields(cfg.seed + 1000, g, cfg.numerics.smoothness).log_rho.sample(g);
    const auto lambda = map(env, [](double v) { return 0.4 + 0.2 * v; });
    const auto rep = kg::action_gradient_check(mf.polar, loose, lambda, a, cfg.numerics.gradient_epsilon, order);
    r.checks.push_back(Check::upper("action.gradient", "finite-difference vs Euler-Lagrange gradients, relative",
                                    rep.worst_relative(), cfg.numerics.tol_gradient));

    Table t{"action_gradient.csv", {"field", "t", "x", "finite_difference", "euler_lagrange"}, {}};
    for (const auto& f : rep.fields) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (f.finite_difference[i] == 0.0 && f.euler_lagrange[i] == 0.0) continue;
            t.rows.push_back({f.field, g.coordinate_of(i, 0), g.coordinate_of(i, 1), f.finite_difference[i],
                              f.euler_lagrange[i]});
        }
        r.diagnostics["correlation_" + f.field] = f.correlation;
        r.diagnostics["relative_" + f.field] = f.relative_deviation;
    }

    const std::vector<double> p{ph.momentum};
    const auto pw = plane_wave_fields(g, p, ph.hbar, ph.mass);
    const auto st = kg::action_gradient_check(pw.polar, quantum_potential(pw.polar, order), RealField(g, 0.0), a,
                                              cfg.numerics.gradient_epsilon, order);
    double fd = 0.0, el = 0.0;
    for (const auto& f : st.fields) {
        fd = std::max(fd, f.max_fd);
        el = std::max(el, f.max_el);
    }
    r.checks.push_back(Check::upper("action.stationary", "max finite-difference gradient at an on-shell plane wave", fd,
                                    cfg.numerics.tol_stationary));
    r.diagnostics["stationary_max_euler_lagrange"] = el;
    r.diagnostics["perturbed_points"] = rep.perturbed_points;
    r.tables.push_back(std::move(t));
    return r;
}

std::string timestamp(std::string& source) {
    std::time_t t = 0;
    source = "fixed";
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0') {
            t = static_cast<std::time_t>(v);
            source = "SOURCE_DATE_EPOCH";
        }
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::ordered_json check_json(const Check& c, Experiment e) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["experiment"] = to_string(e);
    j["description"] = c.description;
    if (c.range) {
        j["comparison"] = "within";
        j["measured"] = {c.measured, c.measured_hi};
        j["bounds"] = {c.bound_lo, c.bound_hi};
    } else {
        j["comparison"] = "<=";
        j["measured"] = c.measured;
        j["tolerance"] = c.bound_hi;
    }
    j["passed"] = c.passed;
    return j;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& r) {
    std::filesystem::create_directories(dir);
    for (const auto& t : r.tables) {
        std::ofstream f(dir / t.name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / t.name).string());
        t.write_csv(f);
    }
}

void write_report(const std::filesystem::path& dir, const nlohmann::ordered_json& report) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / "report.json", std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / "report.json").string());
    f << report.dump(2) << '\n';
}

}  // namespace

Check Check::upper(std::string id, std::string description, double measured, double bound) {
    Check c;
    c.id = std::move(id);
    c.description = std::move(description);
    c.measured = measured;
    c.bound_hi = bound;
    c.passed = std::isfinite(measured) && measured <= bound;
    return c;
}

Check Check::within(std::string id, std::string description, const std::vector<double>& values, double lo, double hi) {
    Check c;
    c.id = std::move(id);
    c.description = std::move(description);
    c.range = true;
    c.bound_lo = lo;
    c.bound_hi = hi;
    if (values.empty()) {
        c.measured = c.measured_hi = kNaN;
        c.passed = false;
        return c;
    }
    c.measured = *std::min_element(values.begin(), values.end());
    c.measured_hi = *std::max_element(values.begin(), values.end());
    c.passed = std::all_of(values.begin(), values.end(), [&](double v) { return std::isfinite(v) && v >= lo && v <= hi; });
    return c;
}

std::string Check::summary() const {
    std::string s = std::string(passed ? "PASS" : "FAIL") + "  " + id + "  ";
    if (range) {
        s += "measured [" + short_number(measured) + ", " + short_number(measured_hi) + "] within [" +
             short_number(bound_lo) + ", " + short_number(bound_hi) + "]";
    } else {
        s += "measured " + short_number(measured) + " <= " + short_number(bound_hi);
    }
    return s;
}

void Table::write_csv(std::ostream& out) const {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            if (const double* d = std::get_if<double>(&row[c])) {
                out << format_number(*d);
            } else if (const long long* n = std::get_if<long long>(&row[c])) {
                out << *n;
            } else {
                out << std::get<std::string>(row[c]);
            }
        }
        out << '\n';
    }
}

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ExperimentResult run_experiment(const RunConfig& cfg, Experiment e) {
    ExperimentResult r;
    switch (e) {
        case Experiment::identity_suite: r = identity_suite(cfg); break;
        case Experiment::convergence_suite: r = convergence_suite(cfg); break;
        case Experiment::lambda_profile: r = lambda_profile(cfg); break;
        case Experiment::mass_landscape: r = mass_landscape(cfg); break;
        case Experiment::neutrino_limit: r = neutrino_limit(cfg); break;
        case Experiment::dispersion_scan: r = dispersion_scan(cfg); break;
        case Experiment::action_gradient: r = action_gradient(cfg); break;
    }
    r.experiment = e;
    return r;
}

nlohmann::ordered_json build_report(const RunConfig& cfg, const std::vector<ExperimentResult>& results) {
    nlohmann::ordered_json manifest;
    manifest["tool"] = "vdlab";
    manifest["code_version"] = kVersion;
    manifest["experiment"] = cfg.all ? std::string("all") : std::string(to_string(cfg.experiment));
    manifest["seed"] = cfg.seed;
    manifest["refine_levels"] = cfg.refine_levels;
    manifest["signature"] = cfg.grid.build(0).signature();
    manifest["metric_diag"] = {cfg.grid.metric_t, cfg.grid.metric_x};
    manifest["stencil_order"] = static_cast<int>(cfg.numerics.order);
    manifest["include_conformal"] = cfg.physics.include_conformal;
    auto modes = nlohmann::ordered_json::object();
    for (const auto& r : results) modes[to_string(r.experiment)] = r.derivative_mode;
    manifest["derivative_mode"] = modes;
    std::string source;
    manifest["timestamp"] = timestamp(source);
    manifest["timestamp_source"] = source;
    auto echo = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.echo) echo[k] = v;
    manifest["config"] = echo;

    auto checks = nlohmann::ordered_json::array();
    auto tables = nlohmann::ordered_json::array();
    auto diagnostics = nlohmann::ordered_json::object();
    std::size_t passed = 0, total = 0;
    for (const auto& r : results) {
        for (const auto& c : r.checks) {
            checks.push_back(check_json(c, r.experiment));
            ++total;
            if (c.passed) ++passed;
        }
        for (const auto& t : r.tables) {
            const std::string file = cfg.all ? std::string(to_string(r.experiment)) + "/" + t.name : t.name;
            tables.push_back({{"experiment", to_string(r.experiment)},
                              {"file", file},
                              {"columns", t.columns},
                              {"rows", t.rows.size()}});
        }
        diagnostics[to_string(r.experiment)] = r.diagnostics;
    }
    nlohmann::ordered_json report;
    report["manifest"] = manifest;
    report["checks"] = checks;
    report["tables"] = tables;
    report["diagnostics"] = diagnostics;
    report["summary"] = {{"checks", total},
                         {"passed", passed},
                         {"failed", total - passed},
                         {"status", passed == total ? "pass" : "fail"}};
    return report;
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
    RunOutcome out;
    out.output_dir = cfg.output_dir;
    const std::filesystem::path dir(cfg.output_dir);
    const std::vector<Experiment> which = cfg.all ? all_experiments() : std::vector<Experiment>{cfg.experiment};
    std::vector<std::future<ExperimentResult>> jobs;
    for (auto e : which) jobs.push_back(std::async(std::launch::async, [&cfg, e] { return run_experiment(cfg, e); }));
    for (std::size_t j = 0; j < which.size(); ++j) {
        const auto e = which[j];
        auto r = jobs[j].get();
        write_outputs(cfg.all ? dir / to_string(e) : dir, r);
        if (cfg.all) {
            RunConfig single = cfg;
            single.all = false;
            single.experiment = e;
            for (auto& [k, v] : single.echo) {
                if (k == "run.experiment") v = to_string(e);
            }
            write_report(dir / to_string(e), build_report(single, {r}));
        }
        for (const auto& c : r.checks) log << to_string(e) << "  " << c.summary() << '\n';
        out.results.push_back(std::move(r));
    }
    write_report(dir, build_report(cfg, out.results));
    const bool ok = std::all_of(out.results.begin(), out.results.end(), [](const auto& r) { return r.passed(); });
    out.exit_code = ok ? 0 : 2;
    log << (ok ? "all checks passed" : "some checks failed") << "; report: " << (dir / "report.json").string() << '\n';
    return out;
}

}  // namespace vdlab::runner
