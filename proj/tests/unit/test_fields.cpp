#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vdlab/calculus.hpp"
#include "vdlab/manufactured.hpp"

using namespace vdlab;

namespace {

constexpr double kPi = std::numbers::pi;

SpacetimeGrid periodic_grid(std::size_t n) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, n + 1, 0.0, 2.0 * kPi, n);
}

// Static Gaussian on a one-sided x axis, sqrt(rho) = exp(-x^2 / 2 sigma^2).
PolarDecomposition gaussian(const SpacetimeGrid& g, double sigma, double mass = 1.0) {
    auto rho = RealField::sample(g, [&](auto x) { return std::exp(-x[1] * x[1] / (sigma * sigma)); });
    return PolarDecomposition(rho, RealField(g, 0.0), 1.0, mass);
}

SpacetimeGrid gaussian_grid(std::size_t nx) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 9, -3.0, 3.0, nx, Boundary::one_sided);
}

}  // namespace

TEST_CASE("from_polar examples") {
    const auto g = periodic_grid(8);
    const auto one = from_polar(PolarDecomposition(RealField(g, 1.0), RealField(g, 0.0), 1.0, 1.0));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(one[i] == cplx(1.0, 0.0));

    const double hbar = 0.7;
    const auto two_i = from_polar(PolarDecomposition(RealField(g, 4.0), RealField(g, kPi * hbar / 2), hbar, 1.0));
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(two_i[i].real() == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(two_i[i].imag() == doctest::Approx(2.0));
    }

    const auto mf = generate_manufactured_fields(11, g, 2);
    const auto phi = from_polar(mf.polar);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::norm(phi[i]) == doctest::Approx(mf.polar.rho()[i]).epsilon(1e-14));
}

TEST_CASE("density floor is enforced") {
    const auto g = periodic_grid(8);
    RealField rho(g, 1.0);
    rho[5] = 1e-14;
    CHECK_THROWS_AS(PolarDecomposition(rho, RealField(g, 0.0), 1.0, 1.0), NumericalError);
    CHECK_THROWS_AS(PolarDecomposition(RealField(g, 1.0), RealField(g, 0.0), -1.0, 1.0), InvalidArgument);
    ComplexField phi(g, cplx(1.0, 0.0));
    phi[3] = 0.0;
    CHECK_THROWS_AS(to_polar(phi, 1.0, 1.0), NumericalError);
}

TEST_CASE("to_polar examples and round trip") {
    const auto g = periodic_grid(16);
    const auto p1 = to_polar(ComplexField(g, cplx(1.0, 0.0)), 1.0, 1.0);
    CHECK(max_abs(p1.S()) == 0.0);
    CHECK(max_abs(p1.rho() - RealField(g, 1.0)) == 0.0);

    const double hbar = 0.5;
    const double k = 3.0 * hbar;  // three windings over 2 pi
    const auto wave = ComplexField::sample(g, [&](auto x) { return std::exp(cplx(0.0, k * x[1] / hbar)); });
    const auto pw = to_polar(wave, hbar, 1.0);
    CHECK(pw.winding()[1] == 3);
    CHECK(pw.winding()[0] == 0);
    const double offset = pw.S()[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(pw.S()[i] - offset == doctest::Approx(k * g.coordinate_of(i, 1)).epsilon(1e-12));
    }

    const auto mf = generate_manufactured_fields(5, g, 2, 1.0, 1.0);
    const auto back = to_polar(from_polar(mf.polar), 1.0, 1.0);
    CHECK(back.winding() == mf.polar.winding());
    const double shift = back.S()[0] - mf.polar.S()[0];
    const double turns = shift / (2.0 * kPi);
    CHECK(std::abs(turns - std::round(turns)) < 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(back.rho()[i] == doctest::Approx(mf.polar.rho()[i]).epsilon(1e-13));
        CHECK(back.S()[i] - shift == doctest::Approx(mf.polar.S()[i]).epsilon(1e-11));
    }
}

TEST_CASE("quantum potential of a constant density vanishes") {
    const auto g = periodic_grid(8);
    const PolarDecomposition p(RealField(g, 3.0), RealField(g, 0.0), 1.0, 2.0);
    const auto c = quantum_potential(p);
    CHECK(max_abs(c.qtilde) == 0.0);
    CHECK(max_abs(c.Q) == 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(c.omega2[i] == 1.0);
    CHECK_THROWS_AS(quantum_potential(p.with_mass(0.0)), InvalidArgument);
    CHECK(max_abs(qtilde(p.with_mass(0.0))) == 0.0);
}

TEST_CASE("Gaussian quantum potential oracle and convergence") {
    const double sigma = 1.0;
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto g = gaussian_grid((80u << level) + 1);
        const auto p = gaussian(g, sigma, 0.8);
        const auto c = quantum_potential(p);
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.coordinate_of(i, 1);
            if (std::abs(x) > 2.5) continue;
            const double ref = 1.0 / (sigma * sigma) - x * x / std::pow(sigma, 4);
            e = std::max(e, std::abs(c.qtilde[i] - ref));
            CHECK(c.Q[i] == doctest::Approx(c.qtilde[i] / 0.64).epsilon(1e-14));
            CHECK(std::log(c.omega2[i]) == doctest::Approx(c.Q[i]).epsilon(1e-12));
        }
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
    }
    // at x = 0: Q = hbar^2 / (m^2 sigma^2)
    const auto g = gaussian_grid(401);
    const auto c = quantum_potential(gaussian(g, sigma, 0.8));
    const std::size_t centre = g.stride(0) * 4 + 200;
    CHECK(g.coordinate_of(centre, 1) == doctest::Approx(0.0));
    CHECK(c.Q[centre] == doctest::Approx(1.0 / 0.64).epsilon(1e-4));
}

TEST_CASE("overflow in exp(Q) is reported") {
    const auto g = gaussian_grid(41);
    CHECK_THROWS_AS(quantum_potential(gaussian(g, 1.0, 0.01)), NumericalError);
}

TEST_CASE("drift velocity") {
    const auto g = gaussian_grid(161);
    const auto u = drift_velocity(gaussian(g, 1.0));
    CHECK(u.variance() == Variance::contravariant);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate_of(i, 1);
        CHECK(u[1][i] == doctest::Approx(x).epsilon(1e-2));  // contravariant sign flip of -x
        CHECK(std::abs(u[0][i]) < 1e-14);
    }
    const auto c = drift_velocity(PolarDecomposition(RealField(g, 2.0), RealField(g, 0.0), 1.0, 1.0));
    CHECK(max_abs(c[1]) < 1e-13);

    const auto pg = periodic_grid(32);
    const auto a = generate_manufactured_fields(1, pg, 2);
    const auto b = generate_manufactured_fields(2, pg, 2);
    const auto ab = a.polar.with_rho(zip(a.polar.rho(), b.polar.rho(), [](double x, double y) { return x * y; }));
    const auto uab = drift_velocity(ab);
    const auto ua = drift_velocity(a.polar);
    const auto ub = drift_velocity(b.polar);
    // ln-derivative additivity holds to truncation error, not round-off, under stencils
    for (std::size_t mu = 0; mu < 2; ++mu) {
        CHECK(max_abs(uab[mu] - (ua[mu] + ub[mu]), 2) < 5e-2 * (max_abs(ua[mu]) + max_abs(ub[mu])));
    }
}

TEST_CASE("scale law: c rho leaves Q, Omega^2 and u unchanged") {
    const auto g = periodic_grid(24);
    const auto mf = generate_manufactured_fields(9, g, 2);
    const auto scaled = mf.polar.with_rho(7.5 * mf.polar.rho());
    const auto c0 = quantum_potential(mf.polar);
    const auto c1 = quantum_potential(scaled);
    CHECK(max_abs(c0.Q - c1.Q) < 1e-12 * (1.0 + max_abs(c0.Q)));
    CHECK(max_abs(c0.omega2 - c1.omega2) < 1e-12 * max_abs(c0.omega2));
    const auto u0 = drift_velocity(mf.polar);
    const auto u1 = drift_velocity(scaled);
    CHECK(max_abs(u0[1] - u1[1]) < 1e-12 * (1.0 + max_abs(u0[1])));
}

TEST_CASE("phase identity") {
    const auto g = periodic_grid(16);
    const PolarDecomposition cst(RealField(g, 2.0), RealField(g, 0.3), 1.0, 1.0);
    CHECK(phase_identity_residual(from_polar(cst), cst).abs < 1e-14);

    // plane wave, analytic grad S compared after stencil on phi
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto gl = periodic_grid(32u << level);
        const auto S = RealField::sample(gl, [](auto x) { return 1.3 * x[0] - 2.0 * x[1]; });
        const PolarDecomposition pw(RealField(gl, 1.0), S, 1.0, 1.0, {0, -2});
        const double r = phase_identity_residual(from_polar(pw), pw).abs;
        if (level > 0) CHECK(prev / r == doctest::Approx(4.0).epsilon(0.1));
        prev = r;
    }

    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        double p2 = 0.0;
        for (int level = 0; level < 3; ++level) {
            const auto gl = periodic_grid(32u << level);
            const auto mf = generate_manufactured_fields(seed, gl, 2);
            const double r = phase_identity_residual(PolarCalculus::stencil(mf.polar)).abs;
            if (level > 0) {
                CHECK(p2 / r > 3.5);
                CHECK(p2 / r < 4.5);
            }
            p2 = r;
            CHECK(phase_identity_residual(PolarCalculus::analytic(mf.polar, mf.pack)).relative() < 1e-10);
        }
    }
}

TEST_CASE("manufactured fields: determinism, smoothness 0, analytic pack") {
    const auto g = periodic_grid(32);
    const auto a = generate_manufactured_fields(42, g, 3);
    const auto b = generate_manufactured_fields(42, g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(a.polar.rho()[i] == b.polar.rho()[i]);
        CHECK(a.polar.S()[i] == b.polar.S()[i]);
    }
    const auto flat = generate_manufactured_fields(42, g, 0);
    const double r0 = flat.polar.rho()[0];
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(flat.polar.rho()[i] == r0);

    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto gl = periodic_grid(32u << level);
        const auto mf = generate_manufactured_fields(42, gl, 2);
        const auto lr = map(mf.polar.rho(), [](double r) { return std::log(r); });
        const double e = max_abs(partial(lr, 1) - mf.pack.grad_log_rho[1]);
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
    }

    // closed-form mixed derivative against a stencil of the closed-form first derivative
    const auto mf = generate_manufactured_fields(3, periodic_grid(256), 2);
    const std::vector<int> dx{0, 1}, dtx{1, 1};
    const auto fx = mf.log_rho.sample_derivative(mf.polar.grid(), dx);
    const auto ftx = mf.log_rho.sample_derivative(mf.polar.grid(), dtx);
    CHECK(max_abs(partial(fx, 0) - ftx, 2) < 1e-3 * max_abs(ftx));
}
