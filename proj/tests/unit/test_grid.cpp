#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vdlab/operators.hpp"

using namespace vdlab;

namespace {

SpacetimeGrid box_1p1(std::size_t nt, std::size_t nx, Boundary xb = Boundary::one_sided) {
    return SpacetimeGrid::lorentzian_1p1(0.0, 1.0, nt, -1.0, 1.0, nx, xb);
}

double interior_error(const RealField& a, const RealField& b, std::size_t margin) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.grid().interior(i, margin)) e = std::max(e, std::abs(a[i] - b[i]));
    }
    return e;
}

}  // namespace

TEST_CASE("grid construction and validation") {
    const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 2.0, 9, 0.0, 4.0, 8);
    CHECK(g.dim() == 2);
    CHECK(g.size() == 72);
    CHECK(g.spacing(0) == doctest::Approx(0.25));
    CHECK(g.spacing(1) == doctest::Approx(0.5));
    CHECK(g.time_axis() == 0);
    CHECK(g.signature() == "(+,-)");
    CHECK(g.volume_factor() == 1.0);

    CHECK_THROWS_AS(SpacetimeGrid({{0, 1, 3, 1.0, Boundary::one_sided}, {0, 1, 8, -1.0, Boundary::periodic}}),
                    InvalidArgument);
    CHECK_THROWS_AS(SpacetimeGrid({{0, 1, 8, 1.0, Boundary::one_sided}, {0, 1, 8, 1.0, Boundary::periodic}}),
                    InvalidArgument);
    CHECK_THROWS_AS(SpacetimeGrid({{0, 1, 8, 1.0, Boundary::one_sided}, {0, 1, 8, 0.0, Boundary::periodic}}),
                    InvalidArgument);
    CHECK_THROWS_AS(SpacetimeGrid({{0, 1, 8, 1.0, Boundary::one_sided}}), InvalidArgument);
}

TEST_CASE("index helpers round-trip") {
    SpacetimeGrid g({{0, 1, 5, 1.0, Boundary::one_sided},
                     {0, 1, 6, -1.0, Boundary::periodic},
                     {0, 1, 7, -1.0, Boundary::periodic},
                     {0, 1, 8, -1.0, Boundary::periodic}});
    CHECK(g.signature() == "(+,-,-,-)");
    for (std::size_t i = 0; i < g.size(); i += 37) {
        const auto idx = g.multi_index(i);
        CHECK(g.flat_index(idx) == i);
    }
    CHECK(g.format_index(g.stride(0) * 2 + 3) == "(2,0,0,3)");
}

TEST_CASE("quadrature weights sum to the coordinate volume") {
    const auto g = box_1p1(9, 12, Boundary::periodic);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.quadrature_weight(i);
    CHECK(s == doctest::Approx(g.coordinate_volume()).epsilon(1e-14));
    CHECK(g.coordinate_volume() == doctest::Approx(2.0));
}

TEST_CASE("gradient of a constant vanishes") {
    const auto g = box_1p1(7, 9);
    const RealField one(g, 1.0);
    for (auto order : {StencilOrder::second, StencilOrder::fourth}) {
        const auto d = gradient(one, order);
        CHECK(max_abs(d[0]) < 1e-13);
        CHECK(max_abs(d[1]) < 1e-13);
        CHECK(max_abs(dalembertian(one, order)) < 1e-12);
    }
}

TEST_CASE("polynomial exactness including one-sided boundaries") {
    const auto g = box_1p1(9, 11);
    const auto lin = RealField::sample(g, [](auto x) { return 3.0 * x[1] - 2.0 * x[0] + 1.0; });
    const auto d = gradient(lin);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(d[1][i] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(d[0][i] == doctest::Approx(-2.0).epsilon(1e-12));
    }
    const auto t2 = RealField::sample(g, [](auto x) { return x[0] * x[0]; });
    const auto x2 = RealField::sample(g, [](auto x) { return x[1] * x[1]; });
    const auto bt = dalembertian(t2);
    const auto bx = dalembertian(x2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(bt[i] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(bx[i] == doctest::Approx(-2.0).epsilon(1e-10));
    }
    // fourth order is exact through degree 4
    const auto q4 = RealField::sample(g, [](auto x) { return std::pow(x[1], 4) + x[0] * x[0] * x[0]; });
    const auto d4 = gradient(q4, StencilOrder::fourth);
    const auto b4 = dalembertian(q4, StencilOrder::fourth);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g.coordinate_of(i, 0);
        const double x = g.coordinate_of(i, 1);
        CHECK(d4[1][i] == doctest::Approx(4.0 * x * x * x).epsilon(1e-9));
        CHECK(b4[i] == doctest::Approx(6.0 * t - 12.0 * x * x).epsilon(1e-8));
    }
}

TEST_CASE("raise and lower index") {
    const auto g = box_1p1(6, 6, Boundary::periodic);
    RealCovector w(Variance::covariant, {RealField(g, 2.0), RealField(g, 5.0)});
    const auto up = raise_index(w);
    CHECK(up.variance() == Variance::contravariant);
    CHECK(up[0][0] == 2.0);
    CHECK(up[1][0] == -5.0);

    SpacetimeGrid g4({{0, 1, 5, 1.0, Boundary::one_sided},
                      {0, 1, 5, -1.0, Boundary::periodic},
                      {0, 1, 5, -1.0, Boundary::periodic},
                      {0, 1, 5, -1.0, Boundary::periodic}});
    RealCovector ones(Variance::covariant, {RealField(g4, 1.0), RealField(g4, 1.0), RealField(g4, 1.0), RealField(g4, 1.0)});
    const auto u4 = raise_index(ones);
    CHECK(u4[0][3] == 1.0);
    CHECK(u4[1][3] == -1.0);
    CHECK(u4[3][3] == -1.0);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    const auto r0 = RealField::sample(g, [&](auto) { return n(rng); });
    const auto r1 = RealField::sample(g, [&](auto) { return n(rng); });
    const RealCovector rw(Variance::covariant, {r0, r1});
    const auto back = lower_index(raise_index(rw));
    CHECK(back.variance() == Variance::covariant);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(back[0][i] == r0[i]);
        CHECK(back[1][i] == r1[i]);
    }
    CHECK_THROWS_AS(divergence(rw), InvalidArgument);
}

TEST_CASE("divergence of a gradient of a quadratic is exact") {
    const auto g = box_1p1(9, 9);
    const auto f = RealField::sample(g, [](auto x) { return 0.5 * x[0] * x[0] + 2.0 * x[1] * x[1] + x[0] * x[1]; });
    const auto div = divergence(raise_index(gradient(f)));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(div[i] == doctest::Approx(1.0 - 4.0).epsilon(1e-10));
    const RealCovector cst(Variance::contravariant, {RealField(g, 3.0), RealField(g, -1.0)});
    CHECK(max_abs(divergence(cst)) < 1e-12);
}

TEST_CASE("second-order convergence of the first derivative") {
    double prev = 0.0;
    for (int level = 0; level < 4; ++level) {
        const std::size_t n = 16u << level;
        const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 5, 0.0, 2.0 * std::numbers::pi, n);
        const auto f = RealField::sample(g, [](auto x) { return std::sin(x[1]); });
        const auto ref = RealField::sample(g, [](auto x) { return std::cos(x[1]); });
        const double e = interior_error(partial(f, 1), ref, 0);
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.05));
        prev = e;
    }
}

TEST_CASE("one-sided stencils converge at the declared order") {
    for (auto order : {StencilOrder::second, StencilOrder::fourth}) {
        const double expected = order == StencilOrder::second ? 4.0 : 16.0;
        // boundary and interior error terms trade places before the asymptotic regime
        const double lo = order == StencilOrder::second ? 0.85 : 0.7;
        const double hi = order == StencilOrder::second ? 1.2 : 1.4;
        double prev1 = 0.0, prev2 = 0.0;
        for (int level = 0; level < 3; ++level) {
            const std::size_t n = (20u << level) + 1;
            const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 7, 0.0, 1.5, n, Boundary::one_sided);
            const auto f = RealField::sample(g, [](auto x) { return std::exp(x[1]) * std::sin(2.0 * x[1]); });
            const auto d1 = RealField::sample(g, [](auto x) {
                return std::exp(x[1]) * (std::sin(2.0 * x[1]) + 2.0 * std::cos(2.0 * x[1]));
            });
            const auto d2 = RealField::sample(g, [](auto x) {
                return std::exp(x[1]) * (-3.0 * std::sin(2.0 * x[1]) + 4.0 * std::cos(2.0 * x[1]));
            });
            const double e1 = interior_error(partial(f, 1, order), d1, 0);
            const double e2 = interior_error(second_partial(f, 1, order), d2, 0);
            if (level > 0) {
                CHECK(prev1 / e1 > lo * expected);
                CHECK(prev1 / e1 < hi * expected);
                CHECK(prev2 / e2 > lo * expected);
                CHECK(prev2 / e2 < hi * expected);
            }
            prev1 = e1;
            prev2 = e2;
        }
    }
}

TEST_CASE("plane wave d'Alembertian") {
    const double k = 2.0, w = 3.0;
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, (32u << level) + 1, 0.0, 2.0 * std::numbers::pi,
                                                     32u << level);
        const auto f = ComplexField::sample(g, [&](auto x) { return std::exp(cplx(0.0, k * x[1] - w * x[0])); });
        const auto b = dalembertian(f);
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.interior(i, 1)) e = std::max(e, std::abs(b[i] / f[i] + (w * w - k * k)));
        }
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.1));
        prev = e;
    }
}

TEST_CASE("metric consistency and linearity") {
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const std::size_t n = 24u << level;
        const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, n + 1, 0.0, 2.0 * std::numbers::pi, n);
        const auto f = RealField::sample(g, [](auto x) { return std::sin(x[1] + 2.0 * x[0]) * std::cos(x[1]); });
        const double e = interior_error(dalembertian(f), divergence(raise_index(gradient(f))), 4);
        if (level > 0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.15));
        prev = e;
    }

    const auto g = box_1p1(11, 13, Boundary::periodic);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    const auto a = RealField::sample(g, [&](auto) { return n(rng); });
    const auto b = RealField::sample(g, [&](auto) { return n(rng); });
    const auto combo = a + 2.5 * b;
    CHECK(interior_error(dalembertian(combo), dalembertian(a) + 2.5 * dalembertian(b), 0) < 1e-10);
    CHECK(interior_error(partial(combo, 0), partial(a, 0) + 2.5 * partial(b, 0), 0) < 1e-10);
}

TEST_CASE("seam jump differentiates a wound phase") {
    const double L = 2.0 * std::numbers::pi;
    const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 6, 0.0, L, 16);
    const auto S = RealField::sample(g, [](auto x) { return 2.0 * x[1]; });
    const std::vector<double> jump{0.0, 2.0 * L};
    const auto d = partial(S, 1, StencilOrder::second, jump);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(d[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(max_abs(dalembertian(S, StencilOrder::fourth, jump)) < 1e-10);
}

TEST_CASE("non-finite input is reported with its index") {
    const auto g = box_1p1(5, 6);
    RealField f(g, 0.0);
    f[g.stride(0) * 2 + 3] = std::nan("");
    try {
        (void)gradient(f);
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("(2,3)") != std::string::npos);
    }
}

TEST_CASE("fourth order needs six points on one-sided axes") {
    const auto g = box_1p1(5, 9);
    CHECK_THROWS_AS(gradient(RealField(g, 1.0), StencilOrder::fourth), InvalidArgument);
}

TEST_CASE("refinement keeps extents") {
    const auto g = box_1p1(9, 16, Boundary::periodic);
    const auto r = g.refined(2);
    CHECK(r.points(0) == 33);
    CHECK(r.points(1) == 64);
    CHECK(r.spacing(0) == doctest::Approx(g.spacing(0) / 4));
    CHECK(r.spacing(1) == doctest::Approx(g.spacing(1) / 4));
}
