#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vdlab {

enum class Boundary { periodic, one_sided };

enum class StencilOrder { second = 2, fourth = 4 };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct AxisSpec {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t points = 5;
    double metric = -1.0;  // diagonal metric entry g_aa
    Boundary boundary = Boundary::periodic;

    bool operator==(const AxisSpec&) const = default;
};

/**
 * Uniform tensor-product spacetime grid with a constant diagonal metric.
 *
 * Samples are stored row-major with axis 0 slowest. Periodic axes exclude the
 * right endpoint (h = L/n); one-sided axes include both endpoints
 * (h = L/(n-1)). The metric must be Lorentzian: exactly one positive entry,
 * which marks the time axis. Constant diagonal metrics have vanishing
 * Christoffel symbols and Ricci scalar, so covariant derivatives of scalars
 * and vectors reduce to partial derivatives.
 */
class SpacetimeGrid {
public:
    explicit SpacetimeGrid(std::vector<AxisSpec> axes);

    // t in [t_lo, t_hi] one-sided, x in [x_lo, x_hi) periodic unless overridden,
    // metric (+1, -1).
    static SpacetimeGrid lorentzian_1p1(double t_lo, double t_hi, std::size_t nt,
                                        double x_lo, double x_hi, std::size_t nx,
                                        Boundary x_boundary = Boundary::periodic);

    std::size_t dim() const { return axes_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<AxisSpec>& axes() const { return axes_; }
    const AxisSpec& axis(std::size_t a) const { return axes_.at(a); }

    std::size_t points(std::size_t a) const { return axes_[a].points; }
    double spacing(std::size_t a) const { return spacing_[a]; }
    double metric(std::size_t a) const { return axes_[a].metric; }
    double inverse_metric(std::size_t a) const { return 1.0 / axes_[a].metric; }
    bool periodic(std::size_t a) const { return axes_[a].boundary == Boundary::periodic; }
    std::size_t stride(std::size_t a) const { return strides_[a]; }
    std::size_t time_axis() const { return time_axis_; }

    std::size_t index_along(std::size_t flat, std::size_t a) const {
        return (flat / strides_[a]) % axes_[a].points;
    }
    double coordinate(std::size_t a, std::size_t i) const {
        return axes_[a].lower + static_cast<double>(i) * spacing_[a];
    }
    double coordinate_of(std::size_t flat, std::size_t a) const {
        return coordinate(a, index_along(flat, a));
    }
    void coordinates_of(std::size_t flat, std::span<double> out) const;

    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t flat_index(std::span<const std::size_t> idx) const;
    std::string format_index(std::size_t flat) const;

    // sqrt(|det g|), constant on the grid.
    double volume_factor() const;
    // Trapezoid weights on one-sided axes, uniform on periodic axes; the
    // weights sum to the coordinate volume.
    double quadrature_weight(std::size_t flat) const;
    double coordinate_volume() const;

    // True when the point is at least `margin` samples from every one-sided
    // boundary. Periodic axes never restrict.
    bool interior(std::size_t flat, std::size_t margin) const;
    std::vector<std::size_t> interior_indices(std::size_t margin) const;

    // e.g. "(+,-)" for the default 1+1 metric.
    std::string signature() const;

    // Same extents, spacing divided by 2^levels on every axis.
    SpacetimeGrid refined(int levels) const;

    bool operator==(const SpacetimeGrid& other) const { return axes_ == other.axes_; }

private:
    std::vector<AxisSpec> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> spacing_;
    std::size_t size_ = 0;
    std::size_t time_axis_ = 0;
};

}  // namespace vdlab
