#include "vdlab/operators.hpp"

#include <array>
#include <string>

namespace vdlab {
namespace {

// Stencil rows: weights applied to f[j + first + k], k = 0..n-1.
struct Row {
    int first;
    std::array<double, 6> w;
    int n;
};

// First derivative, multiply by 1/h.
constexpr Row d1_o2_center{-1, {-0.5, 0.0, 0.5}, 3};
constexpr Row d1_o2_left{0, {-1.5, 2.0, -0.5}, 3};

constexpr Row d1_o4_center{-2, {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12}, 5};
constexpr Row d1_o4_left0{0, {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12}, 5};
constexpr Row d1_o4_left1{-1, {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12}, 5};

// Second derivative, multiply by 1/h^2.
constexpr Row d2_o2_center{-1, {1.0, -2.0, 1.0}, 3};
constexpr Row d2_o2_left{0, {2.0, -5.0, 4.0, -1.0}, 4};

constexpr Row d2_o4_center{-2, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}, 5};
constexpr Row d2_o4_left0{0, {45.0 / 12, -154.0 / 12, 214.0 / 12, -156.0 / 12, 61.0 / 12, -10.0 / 12}, 6};
constexpr Row d2_o4_left1{-1, {10.0 / 12, -15.0 / 12, -4.0 / 12, 14.0 / 12, -6.0 / 12, 1.0 / 12}, 6};

// Mirror a left-boundary row to the right boundary. Odd derivatives flip sign.
Row mirror(const Row& r, bool odd) {
    Row m{};
    m.n = r.n;
    m.first = -(r.first + r.n - 1);
    for (int k = 0; k < r.n; ++k) {
        m.w[static_cast<std::size_t>(k)] = (odd ? -1.0 : 1.0) * r.w[static_cast<std::size_t>(r.n - 1 - k)];
    }
    return m;
}

struct StencilSet {
    Row center;
    std::vector<Row> left;  // rows for j = 0, 1, ...
    std::vector<Row> right;  // rows for j = n-1, n-2, ...
};

StencilSet stencils(int derivative, StencilOrder order) {
    StencilSet s;
    const bool odd = derivative == 1;
    if (order == StencilOrder::second) {
        s.center = odd ? d1_o2_center : d2_o2_center;
        s.left = {odd ? d1_o2_left : d2_o2_left};
    } else {
        s.center = odd ? d1_o4_center : d2_o4_center;
        s.left = {odd ? d1_o4_left0 : d2_o4_left0, odd ? d1_o4_left1 : d2_o4_left1};
    }
    for (const auto& r : s.left) s.right.push_back(mirror(r, odd));
    return s;
}

template <class T>
void check_axis(const Field<T>& f, std::size_t axis, StencilOrder order, std::span<const double> jump) {
    const auto& g = f.grid();
    if (axis >= g.dim()) throw InvalidArgument("axis out of range");
    const std::size_t need = (order == StencilOrder::fourth && !g.periodic(axis)) ? 6 : 5;
    if (g.points(axis) < need) {
        throw InvalidArgument("axis " + std::to_string(axis) + " has " + std::to_string(g.points(axis)) +
                              " points; stencil needs >= " + std::to_string(need));
    }
    if (!jump.empty()) {
        if (jump.size() != g.dim()) throw InvalidArgument("seam_jump needs one entry per axis");
        if (jump[axis] != 0.0 && !g.periodic(axis)) {
            throw InvalidArgument("seam_jump is only meaningful on periodic axes");
        }
    }
}

template <class T>
Field<T> apply_axis(const Field<T>& f, std::size_t axis, int derivative, StencilOrder order,
                    std::span<const double> jump) {
    check_axis(f, axis, order, jump);
    require_finite(f, derivative == 1 ? "gradient" : "second derivative");

    const auto& g = f.grid();
    const StencilSet s = stencils(derivative, order);
    const std::size_t n = g.points(axis);
    const std::ptrdiff_t ni = static_cast<std::ptrdiff_t>(n);
    const std::size_t stride = g.stride(axis);
    const double h = g.spacing(axis);
    const double scale = derivative == 1 ? 1.0 / h : 1.0 / (h * h);
    const double J = jump.empty() ? 0.0 : jump[axis];
    const bool wrap = g.periodic(axis);
    const std::ptrdiff_t edge = static_cast<std::ptrdiff_t>(s.left.size());

    Field<T> out(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(g.index_along(i, axis));
        const std::size_t base = i - static_cast<std::size_t>(j) * stride;
        const Row* row = &s.center;
        if (!wrap) {
            if (j < edge) row = &s.left[static_cast<std::size_t>(j)];
            else if (j >= ni - edge) row = &s.right[static_cast<std::size_t>(ni - 1 - j)];
        }
        // Weights sum to zero, so differencing against the centre sample is
        // exact on constants.
        const T centre = f[i];
        T acc{};
        for (int k = 0; k < row->n; ++k) {
            std::ptrdiff_t jj = j + row->first + k;
            double shift = 0.0;
            if (wrap) {
                if (jj < 0) {
                    jj += ni;
                    shift = -J;
                } else if (jj >= ni) {
                    jj -= ni;
                    shift = J;
                }
            }
            const T v = f[base + static_cast<std::size_t>(jj) * stride];
            acc += row->w[static_cast<std::size_t>(k)] * ((v - centre) + shift);
        }
        out[i] = acc * scale;
    }
    return out;
}

}  // namespace

template <class T>
Field<T> partial(const Field<T>& f, std::size_t axis, StencilOrder order, std::span<const double> seam_jump) {
    return apply_axis(f, axis, 1, order, seam_jump);
}

template <class T>
Field<T> second_partial(const Field<T>& f, std::size_t axis, StencilOrder order,
                        std::span<const double> seam_jump) {
    return apply_axis(f, axis, 2, order, seam_jump);
}

template <class T>
CovectorField<T> gradient(const Field<T>& f, StencilOrder order, std::span<const double> seam_jump) {
    std::vector<Field<T>> comps;
    comps.reserve(f.grid().dim());
    for (std::size_t a = 0; a < f.grid().dim(); ++a) comps.push_back(partial(f, a, order, seam_jump));
    return CovectorField<T>(Variance::covariant, std::move(comps));
}

template <class T>
CovectorField<T> raise_index(const CovectorField<T>& w) {
    if (w.variance() != Variance::covariant) throw InvalidArgument("raise_index expects a covariant field");
    std::vector<Field<T>> comps;
    for (std::size_t a = 0; a < w.dim(); ++a) {
        for (std::size_t i = 0; i < w[a].size(); ++i) {
            if (!is_finite(w[a][i])) {
                throw NumericalError("raise_index: non-finite sample at index " + w.grid().format_index(i));
            }
        }
        Field<T> c = w[a];
        c *= T(w.grid().inverse_metric(a));
        comps.push_back(std::move(c));
    }
    return CovectorField<T>(Variance::contravariant, std::move(comps));
}

template <class T>
CovectorField<T> lower_index(const CovectorField<T>& w) {
    if (w.variance() != Variance::contravariant) throw InvalidArgument("lower_index expects a contravariant field");
    std::vector<Field<T>> comps;
    for (std::size_t a = 0; a < w.dim(); ++a) {
        Field<T> c = w[a];
        c *= T(w.grid().metric(a));
        comps.push_back(std::move(c));
    }
    return CovectorField<T>(Variance::covariant, std::move(comps));
}

template <class T>
Field<T> divergence(const CovectorField<T>& v, StencilOrder order) {
    if (v.variance() != Variance::contravariant) throw InvalidArgument("divergence expects a contravariant field");
    Field<T> out(v.grid());
    for (std::size_t a = 0; a < v.dim(); ++a) out += partial(v[a], a, order);
    return out;
}

template <class T>
Field<T> dalembertian(const Field<T>& f, StencilOrder order, std::span<const double> seam_jump) {
    const auto& g = f.grid();
    Field<T> out(g);
    for (std::size_t a = 0; a < g.dim(); ++a) {
        Field<T> d2 = second_partial(f, a, order, seam_jump);
        d2 *= T(g.inverse_metric(a));
        out += d2;
    }
    return out;
}

#define VDLAB_INSTANTIATE(T)                                                                        \
    template Field<T> partial(const Field<T>&, std::size_t, StencilOrder, std::span<const double>); \
    template Field<T> second_partial(const Field<T>&, std::size_t, StencilOrder,                   \
                                     std::span<const double>);                                     \
    template CovectorField<T> gradient(const Field<T>&, StencilOrder, std::span<const double>);    \
    template CovectorField<T> raise_index(const CovectorField<T>&);                                \
    template CovectorField<T> lower_index(const CovectorField<T>&);                                \
    template Field<T> divergence(const CovectorField<T>&, StencilOrder);                           \
    template Field<T> dalembertian(const Field<T>&, StencilOrder, std::span<const double>);

VDLAB_INSTANTIATE(double)
VDLAB_INSTANTIATE(cplx)

#undef VDLAB_INSTANTIATE

}  // namespace vdlab
