#pragma once

#include <span>

#include "vdlab/field.hpp"

namespace vdlab {

// Finite-difference operators on SpacetimeGrid fields.
//
// Interior points use central stencils. One-sided axes close with one-sided
// stencils of the same order; periodic axes wrap. Second order needs 5 points
// per axis, fourth order needs 6 on one-sided axes.
//
// `seam_jump[a]` (optional, periodic axes only) declares a quasi-periodic
// field f(x + L_a) = f(x) + seam_jump[a]. This is how an unwrapped phase with
// nonzero winding is differentiated without a spurious jump at the seam.

template <class T>
Field<T> partial(const Field<T>& f, std::size_t axis, StencilOrder order = StencilOrder::second,
                 std::span<const double> seam_jump = {});

// Pure second derivative d_a d_a f with a direct stencil.
template <class T>
Field<T> second_partial(const Field<T>& f, std::size_t axis,
                        StencilOrder order = StencilOrder::second,
                        std::span<const double> seam_jump = {});

// Covariant components d_mu f.
template <class T>
CovectorField<T> gradient(const Field<T>& f, StencilOrder order = StencilOrder::second,
                          std::span<const double> seam_jump = {});

// Multiply component mu by 1/g_mumu.
template <class T>
CovectorField<T> raise_index(const CovectorField<T>& w);

template <class T>
CovectorField<T> lower_index(const CovectorField<T>& w);

// d_mu v^mu for a contravariant field.
template <class T>
Field<T> divergence(const CovectorField<T>& v, StencilOrder order = StencilOrder::second);

// sum_mu g^mumu d_mu d_mu f, built from the direct second-difference stencil
// rather than the gradient of the gradient.
template <class T>
Field<T> dalembertian(const Field<T>& f, StencilOrder order = StencilOrder::second,
                      std::span<const double> seam_jump = {});

// Half-width of the interior stencil; residual norms skip this many points
// (times two for composed operators) next to one-sided boundaries.
inline std::size_t stencil_radius(StencilOrder order) { return order == StencilOrder::second ? 1 : 2; }

}  // namespace vdlab
