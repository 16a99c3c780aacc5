#pragma once

// Shared problem fixtures for unit and acceptance tests.

#include <random>

#include "isp/domain.hpp"
#include "isp/example_e1.hpp"
#include "isp/rh.hpp"

namespace isp::fixtures {

inline Dispersion disp_n(int n) {
    std::vector<double> xi;
    for (int k = n; k >= 1; --k) xi.push_back(-double(k));
    for (int k = 1; k <= n; ++k) xi.push_back(double(k));
    return Dispersion(xi);
}

inline ScalarProfile expo(cplx gamma, double rate) { return ScalarProfile::exp_sum({{gamma, rate}}); }

/// n = 1, xi = (-1, 1), q12 = e^{-x}.
inline MCanonicalPotential n1_potential() {
    MCanonicalPotential p(1);
    p.set_entry(Block::B12, 0, 0, expo(1.0, 1.0));
    return p;
}

/// Closed-form S_H for n1_potential with H = 1.
inline cplx n1_scattering(double lambda) {
    const cplx a = 1.0 - 2.0 * kI * lambda;
    return a / (a - kI);
}

/// n = 2 with every admissible entry populated by small exponential sums.
inline MCanonicalPotential n2_potential() {
    MCanonicalPotential p(2);
    p.set_entry(Block::B11, 1, 0, ScalarProfile::exp_sum({{cplx(0.3, 0.1), 1.0}, {cplx(-0.1, 0.0), 1.5}}));
    p.set_entry(Block::B12, 0, 1, expo(cplx(0.25, -0.2), 1.2));
    p.set_entry(Block::B12, 1, 0, expo(cplx(-0.2, 0.0), 1.1));
    p.set_entry(Block::B12, 1, 1, expo(cplx(0.15, 0.05), 1.3));
    p.set_entry(Block::B21, 0, 0, expo(cplx(0.2, 0.1), 1.0));
    p.set_entry(Block::B21, 0, 1, expo(cplx(0.0, 0.3), 1.4));
    p.set_entry(Block::B21, 1, 0, expo(cplx(-0.15, 0.0), 1.2));
    p.set_entry(Block::B22, 0, 1, ScalarProfile::exp_sum({{cplx(0.2, -0.1), 1.1}, {cplx(0.1, 0.1), 2.0}}));
    return p;
}

/// Coupled example, n = 2, xi = (-2, -1, 1, 2), c_{3,1} = e^{-x}.
inline E1System e1_fixture() {
    std::vector<ScalarProfile> first(2, ScalarProfile::exp_sum({})), last(2, ScalarProfile::exp_sum({}));
    first[1] = expo(1.0, 1.0);  // k = 3
    return E1System(Dispersion({-2.0, -1.0, 1.0, 2.0}), first, last);
}

inline E1Boundary e1_boundary(cplx h12) {
    Mat h(1, 1);
    h(0, 0) = h12;
    return E1Boundary(h);
}

inline Mat random_matrix(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = cplx(g(rng), g(rng));
    return m;
}

/// Random invertible H, conditioned away from singularity.
inline BoundaryMatrix random_boundary(std::mt19937_64& rng, int n) {
    for (;;) {
        Mat h = random_matrix(rng, n);
        if (std::abs(h.determinant()) > 0.1) return BoundaryMatrix(h);
    }
}

/// Rational m x m function with poles on one side, sup norm on the line <= norm_cap.
inline RationalMatrix random_rational(std::mt19937_64& rng, int m, int poles, bool lower, double norm_cap) {
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.5, 2.0);
    RationalMatrix r(m);
    std::vector<std::pair<Mat, cplx>> terms;
    double bound = 0.0;
    for (int p = 0; p < poles; ++p) {
        const cplx z(re(rng), lower ? -im(rng) : im(rng));
        Mat R = random_matrix(rng, m);
        bound += R.operatorNorm() / std::abs(z.imag());
        terms.emplace_back(R, z);
    }
    for (auto& [R, z] : terms) r.add_pole(R * (norm_cap / bound), z);
    return r;
}

}  // namespace isp::fixtures
