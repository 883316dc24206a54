#include "vdlab/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vdlab {

SmoothField::SmoothField(std::size_t dim) : linear(dim, 0.0), quadratic(dim, 0.0) {}

double SmoothField::value(std::span<const double> x) const {
    double v = constant;
    for (std::size_t a = 0; a < dim(); ++a) v += linear[a] * x[a] + quadratic[a] * x[a] * x[a];
    for (const auto& m : modes) {
        double th = m.phase;
        for (std::size_t a = 0; a < dim(); ++a) th += m.wavevector[a] * x[a];
        v += m.amplitude * std::cos(th);
    }
    return v;
}

double SmoothField::derivative(std::span<const double> x, std::span<const int> orders) const {
    if (orders.size() != dim()) throw InvalidArgument("derivative orders need one entry per axis");
    int total = 0;
    int active = -1;
    for (std::size_t a = 0; a < dim(); ++a) {
        if (orders[a] < 0) throw InvalidArgument("negative derivative order");
        total += orders[a];
        if (orders[a] > 0) active = active == -1 ? static_cast<int>(a) : -2;
    }
    if (total == 0) return value(x);

    double v = 0.0;
    if (active >= 0) {
        const auto a = static_cast<std::size_t>(active);
        if (orders[a] == 1) v += linear[a] + 2.0 * quadratic[a] * x[a];
        if (orders[a] == 2) v += 2.0 * quadratic[a];
    }
    for (const auto& m : modes) {
        double th = m.phase;
        double factor = m.amplitude;
        for (std::size_t a = 0; a < dim(); ++a) {
            th += m.wavevector[a] * x[a];
            factor *= std::pow(m.wavevector[a], orders[a]);
        }
        // d^n cos(th) = cos(th + n pi/2)
        switch (total % 4) {
            case 0: v += factor * std::cos(th); break;
            case 1: v -= factor * std::sin(th); break;
            case 2: v -= factor * std::cos(th); break;
            default: v += factor * std::sin(th); break;
        }
    }
    return v;
}

RealField SmoothField::sample(const SpacetimeGrid& g) const {
    return RealField::sample(g, [this](std::span<const double> x) { return value(x); });
}

RealField SmoothField::sample_derivative(const SpacetimeGrid& g, std::span<const int> orders) const {
    return RealField::sample(g, [&](std::span<const double> x) { return derivative(x, orders); });
}

AnalyticPack analytic_pack(const SpacetimeGrid& g, const SmoothField& log_rho, const SmoothField& S) {
    const std::size_t dim = g.dim();
    if (log_rho.dim() != dim || S.dim() != dim) throw InvalidArgument("closed-form field dimension mismatch");
    AnalyticPack pack;
    std::vector<int> ord(dim, 0);
    auto with = [&](std::size_t a, int na, std::size_t b = 0, int nb = 0) {
        std::fill(ord.begin(), ord.end(), 0);
        ord[a] += na;
        ord[b] += nb;
        return std::span<const int>(ord);
    };
    for (std::size_t a = 0; a < dim; ++a) {
        pack.grad_log_rho.push_back(log_rho.sample_derivative(g, with(a, 1)));
        pack.second_log_rho.push_back(log_rho.sample_derivative(g, with(a, 2)));
        pack.grad_S.push_back(S.sample_derivative(g, with(a, 1)));
        pack.second_S.push_back(S.sample_derivative(g, with(a, 2)));
    }
    // d_b Qtilde = sum_a g^aa (l_aab / 2 + l_a l_ab / 2)
    for (std::size_t b = 0; b < dim; ++b) {
        RealField gq(g);
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g.coordinates_of(i, x);
            double s = 0.0;
            for (std::size_t a = 0; a < dim; ++a) {
                const double l_aab = log_rho.derivative(x, with(a, 2, b, 1));
                const double l_ab = log_rho.derivative(x, with(a, 1, b, 1));
                const double l_a = pack.grad_log_rho[a][i];
                s += g.inverse_metric(a) * (0.5 * l_aab + 0.5 * l_a * l_ab);
            }
            gq[i] = s;
        }
        pack.grad_qtilde.push_back(std::move(gq));
    }
    return pack;
}

namespace {

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

void add_modes(SmoothField& f, std::mt19937_64& rng, const SpacetimeGrid& g, int smoothness, double amp) {
    const std::size_t dim = g.dim();
    for (int n = 1; n <= smoothness; ++n) {
        for (std::size_t a = 0; a < dim; ++a) {
            SmoothField::Mode m;
            m.wavevector.assign(dim, 0.0);
            const double L = g.axis(a).upper - g.axis(a).lower;
            m.wavevector[a] = 2.0 * std::numbers::pi * n / L;
            // a second axis gives the mode a diagonal direction
            const std::size_t b = (a + 1) % dim;
            const double Lb = g.axis(b).upper - g.axis(b).lower;
            const int nb = static_cast<int>(rng() % 3) - 1;
            m.wavevector[b] += 2.0 * std::numbers::pi * nb / Lb;
            // keep second derivatives O(amp) whatever the box size
            double k2 = 0.0;
            for (double k : m.wavevector) k2 += k * k;
            m.amplitude = amp * uniform(rng, 0.5, 1.0) / (n * n * std::max(1.0, k2));
            m.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            f.modes.push_back(std::move(m));
        }
    }
}

}  // namespace

ManufacturedFields generate_manufactured_fields(std::uint64_t seed, const SpacetimeGrid& grid, int smoothness,
                                                double hbar, double mass) {
    if (smoothness < 0) throw InvalidArgument("smoothness must be >= 0");
    std::mt19937_64 rng(seed);
    const std::size_t dim = grid.dim();

    SmoothField log_rho(dim);
    SmoothField S(dim);
    std::vector<int> winding(dim, 0);
    log_rho.constant = uniform(rng, -0.5, 0.5);
    S.constant = uniform(rng, -1.0, 1.0);

    if (smoothness > 0) {
        add_modes(log_rho, rng, grid, smoothness, 0.3);
        add_modes(S, rng, grid, smoothness, 0.4 * hbar);
        const std::size_t t = grid.time_axis();
        S.linear[t] = mass * uniform(rng, 1.0, 1.5);
        for (std::size_t a = 0; a < dim; ++a) {
            if (!grid.periodic(a)) continue;
            winding[a] = static_cast<int>(rng() % 3) - 1;
            const double L = grid.axis(a).upper - grid.axis(a).lower;
            S.linear[a] = 2.0 * std::numbers::pi * hbar * winding[a] / L;
        }
    }

    RealField rho = map(log_rho.sample(grid), [](double l) { return std::exp(l); });
    RealField s = S.sample(grid);
    PolarDecomposition polar(std::move(rho), std::move(s), hbar, mass, winding);
    AnalyticPack pack = analytic_pack(grid, log_rho, S);
    return {std::move(polar), std::move(pack), std::move(log_rho), std::move(S)};
}

namespace {

std::vector<int> windings_for(const SpacetimeGrid& g, const SmoothField& S, double hbar) {
    std::vector<int> w(g.dim(), 0);
    for (std::size_t a = 0; a < g.dim(); ++a) {
        if (!g.periodic(a)) continue;
        const double L = g.axis(a).upper - g.axis(a).lower;
        const double turns = S.linear[a] * L / (2.0 * std::numbers::pi * hbar);
        const double r = std::round(turns);
        if (std::abs(turns - r) > 1e-9) {
            throw InvalidArgument("momentum on periodic axis " + std::to_string(a) + " is not a whole winding");
        }
        w[a] = static_cast<int>(r);
    }
    return w;
}

SmoothField plane_wave_phase(const SpacetimeGrid& g, std::span<const double> momentum, double mass) {
    const std::size_t t = g.time_axis();
    if (momentum.size() + 1 != g.dim()) throw InvalidArgument("plane wave needs one momentum per spatial axis");
    SmoothField S(g.dim());
    double shell = mass * mass;
    std::size_t k = 0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
        if (a == t) continue;
        S.linear[a] = -momentum[k++];
        shell -= g.inverse_metric(a) * S.linear[a] * S.linear[a];
    }
    shell /= g.inverse_metric(t);
    if (!(shell >= 0.0)) throw InvalidArgument("no real energy on the mass shell");
    S.linear[t] = std::sqrt(shell);
    return S;
}

ManufacturedFields assemble(const SpacetimeGrid& g, SmoothField log_rho, SmoothField S, double hbar, double mass) {
    auto w = windings_for(g, S, hbar);
    RealField rho = map(log_rho.sample(g), [](double l) { return std::exp(l); });
    PolarDecomposition polar(std::move(rho), S.sample(g), hbar, mass, std::move(w));
    AnalyticPack pack = analytic_pack(g, log_rho, S);
    return {std::move(polar), std::move(pack), std::move(log_rho), std::move(S)};
}

}  // namespace

ManufacturedFields plane_wave_fields(const SpacetimeGrid& grid, std::span<const double> momentum, double hbar,
                                     double mass, double rho0) {
    if (!(rho0 > 0.0)) throw InvalidArgument("plane wave density must be positive");
    SmoothField log_rho(grid.dim());
    log_rho.constant = std::log(rho0);
    return assemble(grid, std::move(log_rho), plane_wave_phase(grid, momentum, mass), hbar, mass);
}

ManufacturedFields travelling_profile_fields(const SpacetimeGrid& grid, double momentum, int mode, double amplitude,
                                             double hbar, double mass) {
    const std::size_t t = grid.time_axis();
    const std::size_t x = t == 0 ? 1 : 0;
    std::vector<double> p(grid.dim() - 1, 0.0);
    p[0] = momentum;
    SmoothField S = plane_wave_phase(grid, p, mass);
    const double E = S.linear[t];
    const double L = grid.axis(x).upper - grid.axis(x).lower;
    const double k = 2.0 * std::numbers::pi * mode / L;

    SmoothField log_rho(grid.dim());
    SmoothField::Mode m;
    m.amplitude = amplitude;
    m.wavevector.assign(grid.dim(), 0.0);
    m.wavevector[x] = k;
    m.wavevector[t] = grid.inverse_metric(x) * momentum * k / (grid.inverse_metric(t) * E);
    log_rho.modes.push_back(std::move(m));
    return assemble(grid, std::move(log_rho), std::move(S), hbar, mass);
}

}  // namespace vdlab
