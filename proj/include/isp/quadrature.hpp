#pragma once

#include <array>
#include <span>
#include <vector>

#include "isp/types.hpp"

namespace isp {

/// Weights for the integral of e^{i omega u} f(u) over one step [0, h], with f
/// replaced by its interpolant. The exponential is integrated exactly, so the
/// error does not grow with |omega h|.
struct PanelWeights {
    std::array<cplx, 3> forward;   // quadratic through u = 0, h, 2h
    std::array<cplx, 3> backward;  // quadratic through u = -h, 0, h
    std::array<cplx, 2> linear;    // chord through u = 0, h
};

PanelWeights exp_panel_weights(cplx omega, double h);

/// Linear-interpolant weights over a partial step [0, d] with nodes at 0 and h.
std::array<cplx, 2> exp_partial_weights(cplx omega, double h, double d);

/// T_m = integral over [s_m, s_last] of e^{i omega s} f(s) ds, s_m = s0 + m h.
std::vector<cplx> tail_integrals(std::span<const cplx> f, double s0, double h, cplx omega);

/// Integral over the whole sampled range.
cplx full_integral(std::span<const cplx> f, double s0, double h, cplx omega);

/// Four-point Lagrange interpolation of uniform samples at fractional index
/// u (0 <= u <= size-1), stencil clamped at the ends.
cplx cubic_interpolate(std::span<const cplx> v, double u);

}  // namespace isp
