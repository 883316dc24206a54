#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "vdlab/error.hpp"
#include "vdlab/grid.hpp"

namespace vdlab {

using cplx = std::complex<double>;

/// One sample per grid point.
template <class T>
class Field {
public:
    using value_type = T;

    explicit Field(SpacetimeGrid grid, T fill = T{})
        : grid_(std::move(grid)), values_(grid_.size(), fill) {}

    Field(SpacetimeGrid grid, std::vector<T> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw InvalidArgument("field has " + std::to_string(values_.size()) +
                                  " samples, grid has " + std::to_string(grid_.size()) + " points");
        }
    }

    // f(coords) where coords is a span of dim() coordinates.
    template <class F>
    static Field sample(const SpacetimeGrid& grid, F&& f) {
        Field out(grid);
        std::vector<double> x(grid.dim());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.coordinates_of(i, x);
            out.values_[i] = static_cast<T>(f(std::span<const double>(x)));
        }
        return out;
    }

    const SpacetimeGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const T> values() const { return values_; }
    std::span<T> values() { return values_; }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    Field& operator+=(const Field& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(T s) {
        for (auto& v : values_) v *= s;
        return *this;
    }

    void check_same_grid(const Field<double>& o) const { require_same_grid(o.grid()); }
    void check_same_grid(const Field<cplx>& o) const { require_same_grid(o.grid()); }

private:
    void require_same_grid(const SpacetimeGrid& g) const {
        if (!(g == grid_)) throw InvalidArgument("fields live on different grids");
    }

    SpacetimeGrid grid_;
    std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

template <class T>
Field<T> operator+(Field<T> a, const Field<T>& b) { return a += b; }
template <class T>
Field<T> operator-(Field<T> a, const Field<T>& b) { return a -= b; }
template <class T>
Field<T> operator*(T s, Field<T> a) { return a *= s; }

// Elementwise map; the output sample type follows fn's return type.
template <class T, class Fn>
auto map(const Field<T>& a, Fn&& fn) {
    using R = std::decay_t<decltype(fn(a[0]))>;
    Field<R> out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
    return out;
}

template <class A, class B, class Fn>
auto zip(const Field<A>& a, const Field<B>& b, Fn&& fn) {
    a.check_same_grid(b);
    using R = std::decay_t<decltype(fn(a[0], b[0]))>;
    Field<R> out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
    return out;
}

inline ComplexField to_complex(const RealField& f) {
    return map(f, [](double v) { return cplx(v, 0.0); });
}
inline RealField real_part(const ComplexField& f) {
    return map(f, [](cplx v) { return v.real(); });
}
inline RealField imag_part(const ComplexField& f) {
    return map(f, [](cplx v) { return v.imag(); });
}
inline ComplexField conj(const ComplexField& f) {
    return map(f, [](cplx v) { return std::conj(v); });
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// Throws NumericalError naming the first non-finite sample in storage order.
template <class T>
void require_finite(const Field<T>& f, const char* what) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!is_finite(f[i])) {
            throw NumericalError(std::string(what) + ": non-finite sample at index " +
                                 f.grid().format_index(i));
        }
    }
}

// Max-norm restricted to points at least `margin` samples from one-sided
// boundaries.
template <class T>
double max_abs(const Field<T>& f, std::size_t margin = 0) {
    double m = 0.0;
    const auto& g = f.grid();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (margin && !g.interior(i, margin)) continue;
        m = std::max(m, std::abs(f[i]));
    }
    return m;
}

enum class Variance { covariant, contravariant };

/// Per-axis components of a vector field; the variance tag records whether
/// the index is down (d_mu f) or up (d^mu f).
template <class T>
class CovectorField {
public:
    CovectorField(Variance variance, std::vector<Field<T>> components)
        : variance_(variance), components_(std::move(components)) {
        if (components_.empty()) throw InvalidArgument("vector field needs components");
        const auto& g = components_.front().grid();
        if (components_.size() != g.dim()) {
            throw InvalidArgument("vector field component count does not match grid dimension");
        }
        for (const auto& c : components_) c.check_same_grid(components_.front());
    }

    Variance variance() const { return variance_; }
    std::size_t dim() const { return components_.size(); }
    const SpacetimeGrid& grid() const { return components_.front().grid(); }

    const Field<T>& operator[](std::size_t a) const { return components_[a]; }
    Field<T>& operator[](std::size_t a) { return components_[a]; }

    const std::vector<Field<T>>& components() const { return components_; }

private:
    Variance variance_;
    std::vector<Field<T>> components_;
};

using RealCovector = CovectorField<double>;
using ComplexCovector = CovectorField<cplx>;

// a_mu b^mu for one covariant and one contravariant argument.
template <class A, class B>
auto contract(const CovectorField<A>& a, const CovectorField<B>& b) {
    if (a.variance() == b.variance()) {
        throw InvalidArgument("contraction needs one covariant and one contravariant field");
    }
    using R = std::decay_t<decltype(a[0][0] * b[0][0])>;
    Field<R> out(a.grid());
    for (std::size_t i = 0; i < out.size(); ++i) {
        R s{};
        for (std::size_t mu = 0; mu < a.dim(); ++mu) s += a[mu][i] * b[mu][i];
        out[i] = s;
    }
    return out;
}

// a_mu a^mu built from covariant components and the diagonal inverse metric.
template <class A, class B>
auto metric_dot(const CovectorField<A>& a, const CovectorField<B>& b) {
    if (a.variance() != b.variance()) {
        throw InvalidArgument("metric_dot needs two fields of the same variance");
    }
    const auto& g = a.grid();
    using R = std::decay_t<decltype(a[0][0] * b[0][0])>;
    Field<R> out(g);
    for (std::size_t i = 0; i < out.size(); ++i) {
        R s{};
        for (std::size_t mu = 0; mu < a.dim(); ++mu) {
            const double w = a.variance() == Variance::covariant ? g.inverse_metric(mu) : g.metric(mu);
            s += w * a[mu][i] * b[mu][i];
        }
        out[i] = s;
    }
    return out;
}

}  // namespace vdlab
