#include "vdlab/grid.hpp"

#include <cmath>
#include <sstream>

#include "vdlab/error.hpp"

namespace vdlab {

const char* to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "one-sided";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "one-sided" || s == "one_sided" || s == "one-sided-interior") return Boundary::one_sided;
    throw InvalidArgument("unknown boundary policy '" + s + "' (expected periodic or one-sided)");
}

SpacetimeGrid::SpacetimeGrid(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
    if (axes_.size() != 2 && axes_.size() != 4) {
        throw InvalidArgument("grid dimension must be 2 (1+1) or 4 (3+1), got " +
                              std::to_string(axes_.size()));
    }
    std::size_t positive = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const AxisSpec& ax = axes_[a];
        if (ax.points < 5) {
            throw InvalidArgument("axis " + std::to_string(a) + ": points_per_axis = " +
                                  std::to_string(ax.points) + ", >= 5 required");
        }
        if (!std::isfinite(ax.lower) || !std::isfinite(ax.upper) || !(ax.upper > ax.lower)) {
            throw InvalidArgument("axis " + std::to_string(a) + ": extent must be a finite interval with upper > lower");
        }
        if (!std::isfinite(ax.metric) || ax.metric == 0.0) {
            throw InvalidArgument("axis " + std::to_string(a) + ": metric entry must be finite and nonzero");
        }
        if (ax.metric > 0.0) {
            ++positive;
            time_axis_ = a;
        }
    }
    if (positive != 1) {
        throw InvalidArgument("metric must be Lorentzian with exactly one positive entry");
    }

    strides_.assign(axes_.size(), 1);
    for (std::size_t a = axes_.size(); a-- > 1;) {
        strides_[a - 1] = strides_[a] * axes_[a].points;
    }
    size_ = strides_[0] * axes_[0].points;

    spacing_.resize(axes_.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const double len = axes_[a].upper - axes_[a].lower;
        const double n = static_cast<double>(axes_[a].points);
        spacing_[a] = periodic(a) ? len / n : len / (n - 1.0);
    }
}

SpacetimeGrid SpacetimeGrid::lorentzian_1p1(double t_lo, double t_hi, std::size_t nt, double x_lo,
                                            double x_hi, std::size_t nx, Boundary x_boundary) {
    return SpacetimeGrid({AxisSpec{t_lo, t_hi, nt, 1.0, Boundary::one_sided},
                          AxisSpec{x_lo, x_hi, nx, -1.0, x_boundary}});
}

void SpacetimeGrid::coordinates_of(std::size_t flat, std::span<double> out) const {
    for (std::size_t a = 0; a < axes_.size(); ++a) out[a] = coordinate_of(flat, a);
}

std::vector<std::size_t> SpacetimeGrid::multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) idx[a] = index_along(flat, a);
    return idx;
}

std::size_t SpacetimeGrid::flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != axes_.size()) throw InvalidArgument("multi-index rank does not match grid dimension");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (idx[a] >= axes_[a].points) throw InvalidArgument("multi-index out of range");
        flat += idx[a] * strides_[a];
    }
    return flat;
}

std::string SpacetimeGrid::format_index(std::size_t flat) const {
    std::ostringstream os;
    os << '(';
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (a) os << ',';
        os << index_along(flat, a);
    }
    os << ')';
    return os.str();
}

double SpacetimeGrid::volume_factor() const {
    double det = 1.0;
    for (const auto& ax : axes_) det *= ax.metric;
    return std::sqrt(std::abs(det));
}

double SpacetimeGrid::quadrature_weight(std::size_t flat) const {
    double w = 1.0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        double wa = spacing_[a];
        if (!periodic(a)) {
            const std::size_t i = index_along(flat, a);
            if (i == 0 || i + 1 == axes_[a].points) wa *= 0.5;
        }
        w *= wa;
    }
    return w;
}

double SpacetimeGrid::coordinate_volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.upper - ax.lower;
    return v;
}

bool SpacetimeGrid::interior(std::size_t flat, std::size_t margin) const {
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (periodic(a)) continue;
        const std::size_t i = index_along(flat, a);
        if (i < margin || i + margin >= axes_[a].points) return false;
    }
    return true;
}

std::vector<std::size_t> SpacetimeGrid::interior_indices(std::size_t margin) const {
    std::vector<std::size_t> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        if (interior(i, margin)) out.push_back(i);
    }
    return out;
}

std::string SpacetimeGrid::signature() const {
    std::string s = "(";
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (a) s += ',';
        s += axes_[a].metric > 0.0 ? '+' : '-';
    }
    return s + ')';
}

SpacetimeGrid SpacetimeGrid::refined(int levels) const {
    if (levels < 0) throw InvalidArgument("refinement levels must be non-negative");
    std::vector<AxisSpec> axes = axes_;
    const std::size_t factor = std::size_t{1} << levels;
    for (auto& ax : axes) {
        ax.points = ax.boundary == Boundary::periodic ? ax.points * factor : (ax.points - 1) * factor + 1;
    }
    return SpacetimeGrid(std::move(axes));
}

}  // namespace vdlab
