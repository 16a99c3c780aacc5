#include "isp/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace isp {

namespace {

// mu_p(theta) = integral_0^1 v^p e^{i theta v} dv for p = 0, 1, 2.
std::array<cplx, 3> moments(cplx theta) {
    std::array<cplx, 3> mu{};
    const cplx it = kI * theta;
    if (std::abs(theta) < 0.5) {
        cplx term = 1.0;  // (i theta)^m / m!
        for (int m = 0; m < 30; ++m) {
            for (int p = 0; p < 3; ++p) mu[p] += term / double(m + p + 1);
            term *= it / double(m + 1);
        }
        return mu;
    }
    const cplx e = std::exp(it);
    mu[0] = (e - 1.0) / it;
    mu[1] = (e - mu[0]) / it;
    mu[2] = (e - 2.0 * mu[1]) / it;
    return mu;
}

}  // namespace

PanelWeights exp_panel_weights(cplx omega, double h) {
    const auto mu = moments(omega * h);
    PanelWeights w;
    w.forward = {h * (mu[2] - 3.0 * mu[1] + 2.0 * mu[0]) / 2.0, h * (2.0 * mu[1] - mu[2]),
                 h * (mu[2] - mu[1]) / 2.0};
    w.backward = {h * (mu[2] - mu[1]) / 2.0, h * (mu[0] - mu[2]), h * (mu[2] + mu[1]) / 2.0};
    w.linear = {h * (mu[0] - mu[1]), h * mu[1]};
    return w;
}

std::array<cplx, 2> exp_partial_weights(cplx omega, double h, double d) {
    if (d <= 0.0) return {0.0, 0.0};
    // integral_0^d e^{i omega u} [(1 - u/h) f0 + (u/h) f1] du, via moments on [0, d]
    const auto mu = moments(omega * d);
    const double r = d / h;
    return {d * (mu[0] - r * mu[1]), d * r * mu[1]};
}

std::vector<cplx> tail_integrals(std::span<const cplx> f, double s0, double h, cplx omega) {
    const std::size_t n = f.size();
    std::vector<cplx> out(n, 0.0);
    if (n < 2) return out;
    const auto w = exp_panel_weights(omega, h);
    // panel contributions, then a reverse cumulative sum
    std::vector<cplx> panel(n - 1);
    const cplx step = std::exp(kI * omega * h);
    cplx phase = std::exp(kI * omega * s0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        cplx v;
        if (n == 2) {
            v = w.linear[0] * f[0] + w.linear[1] * f[1];
        } else if (m + 2 < n) {
            v = w.forward[0] * f[m] + w.forward[1] * f[m + 1] + w.forward[2] * f[m + 2];
        } else {
            v = w.backward[0] * f[m - 1] + w.backward[1] * f[m] + w.backward[2] * f[m + 1];
        }
        panel[m] = phase * v;
        phase *= step;
    }
    for (std::size_t m = n - 1; m-- > 0;) out[m] = out[m + 1] + panel[m];
    return out;
}

cplx full_integral(std::span<const cplx> f, double s0, double h, cplx omega) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    const auto w = exp_panel_weights(omega, h);
    const cplx step = std::exp(kI * omega * h);
    cplx phase = std::exp(kI * omega * s0);
    cplx acc = 0.0;
    for (std::size_t m = 0; m + 1 < n; ++m) {
        cplx v;
        if (n == 2) {
            v = w.linear[0] * f[0] + w.linear[1] * f[1];
        } else if (m + 2 < n) {
            v = w.forward[0] * f[m] + w.forward[1] * f[m + 1] + w.forward[2] * f[m + 2];
        } else {
            v = w.backward[0] * f[m - 1] + w.backward[1] * f[m] + w.backward[2] * f[m + 1];
        }
        acc += phase * v;
        phase *= step;
    }
    return acc;
}

cplx cubic_interpolate(std::span<const cplx> v, double u) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    if (n < 4) {
        const std::ptrdiff_t i = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(u)), 0, n - 2);
        const double t = u - double(i);
        return (1.0 - t) * v[i] + t * v[i + 1];
    }
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(std::floor(u));
    std::ptrdiff_t base = std::clamp<std::ptrdiff_t>(i - 1, 0, n - 4);
    const double t = u - double(base);  // position relative to stencil start, nodes at 0..3
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * v[base] + l1 * v[base + 1] + l2 * v[base + 2] + l3 * v[base + 3];
}

}  // namespace isp
