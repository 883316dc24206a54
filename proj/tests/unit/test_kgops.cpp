#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "vdlab/kgops.hpp"
#include "vdlab/manufactured.hpp"

using namespace vdlab;

namespace {

constexpr double kPi = std::numbers::pi;

SpacetimeGrid periodic_grid(std::size_t n) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, n + 1, 0.0, 2.0 * kPi, n);
}

double max_diff(const ComplexField& a, const ComplexField& b, std::size_t margin) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.grid().interior(i, margin)) m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

bool bitwise_equal(const ComplexField& a, const ComplexField& b) {
    return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(cplx)) == 0;
}

bool bitwise_equal(const RealField& a, const RealField& b) {
    return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

RealField smooth_lambda(const SpacetimeGrid& g, double scale = 1.0) {
    return RealField::sample(g, [&](auto x) { return scale * (0.4 + 0.2 * std::sin(x[1] + 1.0) * std::cos(2.0 * x[0])); });
}

}  // namespace

TEST_CASE("D operators") {
    const auto g = periodic_grid(32);
    const auto mf = generate_manufactured_fields(4, g, 2);
    const PolarDecomposition flat(mf.polar.rho(), RealField(g, 0.0), 1.0, 1.0);
    const auto calc = PolarCalculus::stencil(flat);
    const auto d = kg::apply_D(calc.phi(), calc);
    const auto gr = gradient(calc.phi());
    for (std::size_t mu = 0; mu < 2; ++mu) CHECK(max_diff(d[mu], gr[mu], 0) == 0.0);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const std::vector<double> p{2.0};
        const auto pw = plane_wave_fields(periodic_grid(32u << level), p, 1.0, 1.0, 1.7);
        const auto c = PolarCalculus::stencil(pw.polar);
        const auto dm = kg::apply_D(c);
        const double e = std::max(max_abs(dm[0], c.margin()), max_abs(dm[1], c.margin()));
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
    }
}

TEST_CASE("box_D examples") {
    const auto g = periodic_grid(16);
    const PolarDecomposition cst(RealField(g, 2.0), RealField(g, 0.0), 1.0, 1.0);
    CHECK(max_abs(kg::box_D(PolarCalculus::stencil(cst))) == 0.0);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const std::vector<double> p{-3.0};
        const auto pw = plane_wave_fields(periodic_grid(32u << level), p, 1.0, 0.8);
        const auto c = PolarCalculus::stencil(pw.polar);
        const double e = max_abs(kg::box_D(c), c.margin());
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
        CHECK(max_abs(kg::box_D(PolarCalculus::analytic(pw.polar, pw.pack))) < 1e-12);
    }

    // Gaussian density, S = 0: box_D phi = Qtilde phi with the closed-form Qtilde
    prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto gg = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 9, -3.0, 3.0, (60u << level) + 1, Boundary::one_sided);
        const auto rho = RealField::sample(gg, [](auto x) { return std::exp(-x[1] * x[1]); });
        const auto c = PolarCalculus::stencil(PolarDecomposition(rho, RealField(gg, 0.0), 1.0, 1.0));
        const auto dd = kg::box_D(c);
        double e = 0.0;
        for (std::size_t i = 0; i < gg.size(); ++i) {
            const double x = gg.coordinate_of(i, 1);
            if (std::abs(x) > 2.5) continue;
            e = std::max(e, std::abs(dd[i] - (1.0 - x * x) * c.phi()[i]));
        }
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
    }
}

TEST_CASE("nested box_D cross-check has the same order") {
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto mf = generate_manufactured_fields(8, periodic_grid(32u << level), 2);
        const auto c = PolarCalculus::stencil(mf.polar);
        const auto ca = PolarCalculus::analytic(mf.polar, mf.pack);
        const double e = max_diff(kg::box_D_nested(c.phi(), c), kg::box_D(ca), 2 * c.margin());
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.15));
        prev = e;
    }
}

TEST_CASE("shift theorem on the manufactured corpus") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        double prev_box = 0.0, prev_m = 0.0, prev_p = 0.0;
        for (int level = 0; level < 3; ++level) {
            const auto mf = generate_manufactured_fields(seed, periodic_grid(32u << level), 2);
            const auto r = kg::shift_residual(PolarCalculus::stencil(mf.polar));
            if (level > 0) {
                CHECK(prev_box / r.box.abs > 3.5);
                CHECK(prev_box / r.box.abs < 4.5);
                CHECK(prev_m / r.gradient_minus.abs > 3.5);
                CHECK(prev_m / r.gradient_minus.abs < 4.5);
                CHECK(prev_p / r.gradient_plus.abs > 3.5);
                CHECK(prev_p / r.gradient_plus.abs < 4.5);
            }
            prev_box = r.box.abs;
            prev_m = r.gradient_minus.abs;
            prev_p = r.gradient_plus.abs;
            const auto ra = kg::shift_residual(PolarCalculus::analytic(mf.polar, mf.pack));
            CHECK(ra.box.relative() < 1e-10);
            CHECK(ra.gradient_minus.relative() < 1e-10);
            CHECK(ra.gradient_plus.relative() < 1e-10);
        }
    }
    const auto g = periodic_grid(16);
    const auto trivial = kg::shift_residual(PolarCalculus::stencil(PolarDecomposition(RealField(g, 1.0), RealField(g, 0.0), 1.0, 1.0)));
    CHECK(trivial.box.abs == 0.0);
}

TEST_CASE("fourth-order stencils converge faster on the shift theorem") {
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto mf = generate_manufactured_fields(2, periodic_grid(32u << level), 2);
        const double e = kg::shift_residual(PolarCalculus::stencil(mf.polar, StencilOrder::fourth)).box.abs;
        if (level > 0) CHECK(prev / e > 12.0);
        prev = e;
    }
}

TEST_CASE("plane-wave reduction") {
    const std::vector<double> p{2.0};
    const auto pw = plane_wave_fields(periodic_grid(64), p, 1.0, 1.3);
    const auto calc = PolarCalculus::analytic(pw.polar, pw.pack);
    const auto pol = kg::kg_residual_polar(calc);
    CHECK(pol.motion_norm.abs < 1e-8);
    CHECK(pol.continuity_norm.abs < 1e-8);
    CHECK(kg::kg_residual_wave(calc).norm.abs < 1e-8);
    CHECK(max_abs(kg::box_D(calc)) < 1e-8);

    const auto sc = PolarCalculus::stencil(pw.polar);
    const auto ps = kg::kg_residual_polar(sc);
    CHECK(ps.motion_norm.relative() < 1e-2);
    CHECK(ps.continuity_norm.relative() < 1e-12);  // constant flux
}

TEST_CASE("polar residual grows linearly with a phase perturbation") {
    const auto g = periodic_grid(64);
    const std::vector<double> p{1.0};
    const auto pw = plane_wave_fields(g, p, 1.0, 1.0);
    const auto bump = RealField::sample(g, [](auto x) { return std::sin(x[1]) * std::sin(kPi * x[0]); });
    double r1 = 0.0, r2 = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const double eps = 1e-4 * k;
        const auto pert = pw.polar.with_S(pw.polar.S() + eps * bump);
        const double r = kg::kg_residual_polar(PolarCalculus::stencil(pert)).continuity_norm.abs;
        (k == 1 ? r1 : r2) = r;
    }
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("lambda = 0 follows the lambda-free path bitwise") {
    const auto mf = generate_manufactured_fields(6, periodic_grid(32), 2);
    for (auto calc : {PolarCalculus::stencil(mf.polar), PolarCalculus::analytic(mf.polar, mf.pack)}) {
        const auto a = kg::kg_residual_polar(calc);
        const auto b = kg::kg_residual_polar(calc, RealField(calc.grid(), 0.0));
        CHECK(bitwise_equal(a.motion, b.motion));
        CHECK(bitwise_equal(a.continuity, b.continuity));
        CHECK(a.motion_norm.abs == b.motion_norm.abs);
        CHECK(b.has_lambda);

        const auto gk = kg::general_kg_residual(calc, RealField(calc.grid(), 0.0));
        CHECK(bitwise_equal(gk.field, kg::box_D(calc)));
    }
}

TEST_CASE("quantum-force and conformal wave forms") {
    const auto mf = generate_manufactured_fields(1, periodic_grid(48), 2);
    const auto wa = kg::kg_residual_wave(PolarCalculus::analytic(mf.polar, mf.pack));
    CHECK(wa.form_gap < 1e-12 * wa.norm.scale);
    CHECK(wa.dissipative > 0.0);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto m = generate_manufactured_fields(1, periodic_grid(32u << level), 2);
        const double gap = kg::kg_residual_wave(PolarCalculus::stencil(m.polar)).form_gap;
        if (level > 0) CHECK(prev / gap == doctest::Approx(4.0).epsilon(0.15));
        prev = gap;
    }
}

TEST_CASE("compact form") {
    // arbitrary fields: the corrected difference is an exact identity
    const auto mf = generate_manufactured_fields(12, periodic_grid(48), 2);
    const auto ra = kg::compact_form_check(PolarCalculus::analytic(mf.polar, mf.pack));
    CHECK(ra.corrected.relative() < 1e-12);
    CHECK(ra.difference > 1e-3);

    // travelling profile solves both side conditions, so the forms coincide
    const auto tp = travelling_profile_fields(periodic_grid(64), 1.0, 1, 0.3, 1.0, 1.0);
    const auto ca = PolarCalculus::analytic(tp.polar, tp.pack);
    const auto rt = kg::compact_form_check(ca);
    CHECK(rt.difference < 1e-12 * rt.corrected.scale);
    CHECK(rt.box_d_norm > 1e-2);
    const auto pol = kg::kg_residual_polar(ca);
    CHECK(pol.continuity_norm.relative() < 1e-12);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto t = travelling_profile_fields(periodic_grid(32u << level), 1.0, 1, 0.3, 1.0, 1.0);
        const double d = kg::compact_form_check(PolarCalculus::stencil(t.polar)).difference;
        if (level > 0) CHECK(prev / d == doctest::Approx(4.0).epsilon(0.15));
        prev = d;
    }
}

TEST_CASE("general KG residual is affine in lambda") {
    const auto mf = generate_manufactured_fields(3, periodic_grid(32), 2);
    const auto calc = PolarCalculus::analytic(mf.polar, mf.pack);
    const auto lam = smooth_lambda(calc.grid());
    const auto f0 = kg::general_kg_residual(calc, RealField(calc.grid(), 0.0)).field;
    const auto f1 = kg::general_kg_residual(calc, lam).field;
    const auto f2 = kg::general_kg_residual(calc, 2.0 * lam).field;
    const auto f3 = kg::general_kg_residual(calc, -3.0 * lam).field;
    const double scale = max_abs(f1 - f0);
    CHECK(scale > 0.0);
    CHECK(max_abs((f2 - f0) - cplx(2.0) * (f1 - f0)) < 1e-12 * scale);
    CHECK(max_abs((f3 - f0) + cplx(3.0) * (f1 - f0)) < 1e-12 * scale);
}

TEST_CASE("global phase invariance") {
    const auto mf = generate_manufactured_fields(5, periodic_grid(32), 2);
    const auto shifted = mf.polar.with_S(map(mf.polar.S(), [](double s) { return s + 0.77; }));
    for (bool analytic : {false, true}) {
        const auto a = analytic ? PolarCalculus::analytic(mf.polar, mf.pack) : PolarCalculus::stencil(mf.polar);
        const auto b = analytic ? PolarCalculus::analytic(shifted, mf.pack) : PolarCalculus::stencil(shifted);
        const auto lam = smooth_lambda(a.grid());
        CHECK(kg::shift_residual(b).box.abs == doctest::Approx(kg::shift_residual(a).box.abs).epsilon(1e-9));
        CHECK(kg::kg_residual_wave(b).norm.abs == doctest::Approx(kg::kg_residual_wave(a).norm.abs).epsilon(1e-12));
        CHECK(kg::general_kg_residual(b, lam).norm.abs ==
              doctest::Approx(kg::general_kg_residual(a, lam).norm.abs).epsilon(1e-12));
        CHECK(kg::kg_residual_polar(b, lam).motion_norm.abs == kg::kg_residual_polar(a, lam).motion_norm.abs);
    }
}

TEST_CASE("action value examples") {
    const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 9, 0.0, 2.0 * kPi, 16);
    const double rho0 = 2.5;
    const PolarDecomposition p(RealField(g, rho0), RealField(g, 0.0), 1.0, 1.5);
    const auto c = quantum_potential(p);
    kg::ActionParams a;
    a.mass = 1.5;
    const double A = kg::action_value(p, c, RealField(g, 0.0), a);
    CHECK(A == doctest::Approx(-1.5 * rho0 * g.coordinate_volume()).epsilon(1e-13));

    const auto mf = generate_manufactured_fields(2, g, 2);
    const auto cm = quantum_potential(mf.polar);
    kg::ActionParams am;
    const double A0 = kg::action_value(mf.polar, cm, RealField(g, 0.0), am);
    const double A1 = kg::action_value(mf.polar, cm, smooth_lambda(g, 50.0), am);
    CHECK(A1 == doctest::Approx(A0).epsilon(1e-12));

    kg::ActionParams bad = am;
    bad.ricci_scalar = 0.1;
    CHECK_THROWS_AS(kg::action_value(mf.polar, cm, RealField(g, 0.0), bad), InvalidArgument);
    bad = am;
    bad.mass = 2.0;
    CHECK_THROWS_AS(kg::action_value(mf.polar, cm, RealField(g, 0.0), bad), InvalidArgument);
}

TEST_CASE("action gradients match the Euler-Lagrange fields") {
    const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 16, 0.0, 2.0 * kPi, 24);
    const auto mf = generate_manufactured_fields(21, g, 2);
    const auto lam = smooth_lambda(g);
    kg::ActionParams a;
    // Omega^2 deliberately off the constraint so every term is exercised
    auto c = quantum_potential(mf.polar);
    const auto offset = RealField::sample(g, [](auto x) { return 0.1 * std::cos(x[1]) * x[0]; });
    const auto Q = c.Q + offset;
    const auto loose = conformal_from_Q(c.qtilde, Q);
    const auto r = kg::action_gradient_check(mf.polar, loose, lam, a);
    REQUIRE(r.fields.size() == 3);
    for (const auto& f : r.fields) {
        INFO(f.field);
        CHECK(f.relative_deviation < 1e-3);
        CHECK(f.correlation > 0.999);
        CHECK(f.max_el > 1e-3);
    }

    // the S gradient is -2/m times the discrete continuity divergence
    const auto pr = kg::kg_residual_polar(PolarCalculus::stencil(mf.polar));
    const auto el = kg::euler_lagrange(mf.polar, c, lam, a);
    CHECK(max_abs(el.S + 2.0 * pr.continuity) < 1e-12 * max_abs(el.S));
    CHECK(max_abs(el.lambda, 2) < 1e-12);
}

TEST_CASE("action is stationary at a plane wave") {
    const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 16, 0.0, 2.0 * kPi, 24);
    const std::vector<double> p{1.0};
    const auto pw = plane_wave_fields(g, p, 1.0, 1.0);
    kg::ActionParams a;
    const auto r = kg::action_gradient_check(pw.polar, quantum_potential(pw.polar), RealField(g, 0.0), a);
    for (const auto& f : r.fields) {
        INFO(f.field);
        CHECK(f.max_fd < 1e-6);
        CHECK(f.max_el < 1e-10);
    }
}
