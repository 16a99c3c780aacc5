#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "isp/errors.hpp"
#include "isp/forward.hpp"

using namespace isp;
using fixtures::disp_n;

namespace {

Vec vec(std::initializer_list<cplx> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cplx z : v) out(i++) = z;
    return out;
}

// Classical RK4 for y' = i (lambda sigma - Q(x)) y, marched from x_end to 0
// with the free asymptotics as the starting value.
Vec rk4_origin(const MCanonicalPotential& pot, const Dispersion& disp, double lambda, const Vec& amp, double x_end,
               double h) {
    const int dim = 2 * pot.n();
    Mat L = Mat::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) L(r, r) = lambda * disp[std::size_t(r)];
    auto rhs = [&](double x, const Vec& y) -> Vec { return kI * ((L - pot.matrix(x)) * y); };
    Vec y(dim);
    for (int r = 0; r < dim; ++r) y(r) = std::exp(kI * lambda * disp[std::size_t(r)] * x_end) * amp(r);
    const int steps = int(std::lround(x_end / h));
    double x = x_end;
    for (int s = 0; s < steps; ++s) {
        const Vec k1 = rhs(x, y);
        const Vec k2 = rhs(x - h / 2, y - h / 2 * k1);
        const Vec k3 = rhs(x - h / 2, y - h / 2 * k2);
        const Vec k4 = rhs(x - h, y - h * k3);
        y -= h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        x -= h;
    }
    return y;
}

}  // namespace

TEST_CASE("bounded solution: free case is the plane wave") {
    const MCanonicalPotential pot(2);
    const auto disp = disp_n(2);
    const Vec A = vec({1.0, kI}), B = vec({2.0, -1.0});
    const auto sol = solve_bounded_solution(pot, disp, 1.7, A, B);
    for (std::size_t i : {std::size_t(0), sol.x.size() / 2, sol.x.size() - 1}) {
        const double x = sol.x[i];
        for (int r = 0; r < 4; ++r) {
            const cplx amp = r < 2 ? A(r) : B(r - 2);
            CHECK(std::abs(sol.y[i](r) - std::exp(kI * 1.7 * disp[std::size_t(r)] * x) * amp) < 1e-14);
        }
    }
    const auto [a, b] = asymptotic_coefficients(sol, pot, disp);
    CHECK((a - A).norm() < 1e-14);
    CHECK((b - B).norm() < 1e-14);
}

TEST_CASE("bounded solution: triangular n = 1 closed form y1(0) = A + i B / (1 - 2 i lambda)") {
    const auto pot = fixtures::n1_potential();
    const auto disp = disp_n(1);
    {
        const auto sol = solve_bounded_solution(pot, disp, 0.0, vec({1.0}), vec({1.0}));
        CHECK(std::abs(sol.y1(0)(0) - cplx(1.0, 1.0)) < 1e-6);
        CHECK(std::abs(sol.y2(0)(0) - 1.0) < 1e-15);
    }
    for (double lambda : {-7.5, -1.0, 0.3, 2.0, 25.0}) {
        const cplx A = cplx(0.5, -0.2), B = cplx(-1.0, 0.7);
        const auto sol = solve_bounded_solution(pot, disp, lambda, vec({A}), vec({B}));
        const cplx expect = A + kI * B / (1.0 - 2.0 * kI * lambda);
        CHECK(std::abs(sol.y1(0)(0) - expect) < 1e-6);
        const Vec rk = rk4_origin(pot, disp, lambda, vec({A, B}), 30.0, 1e-3 / std::max(1.0, std::abs(lambda) / 5.0));
        CHECK(std::abs(rk(0) - expect) < 1e-8);
        CHECK(std::abs(sol.y1(0)(0) - rk(0)) < 1e-6);
    }
}

TEST_CASE("asymptotic coefficients: A = 0, B = 1 recovers A = 0") {
    const auto pot = fixtures::n1_potential();
    const auto sol = solve_bounded_solution(pot, disp_n(1), 0.8, vec({0.0}), vec({1.0}));
    const auto [a, b] = asymptotic_coefficients(sol, pot, disp_n(1));
    CHECK(std::abs(a(0)) < 1e-8);
    CHECK(std::abs(b(0) - 1.0) < 1e-8);
}

TEST_CASE("bounded solution: coupled n = 2 agrees with RK4 and round-trips its amplitudes") {
    const auto pot = fixtures::n2_potential();
    const auto disp = disp_n(2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(-10.0, 10.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double lambda = lam(rng);
        const Vec A = fixtures::random_matrix(rng, 2).col(0), B = fixtures::random_matrix(rng, 2).col(0);
        const auto sol = solve_bounded_solution(pot, disp, lambda, A, B);
        Vec amp(4);
        amp << A, B;
        const Vec rk = rk4_origin(pot, disp, lambda, amp, 30.0, 5e-4);
        CHECK((sol.y.front() - rk).norm() < 1e-5 * amp.norm());
        const auto [a, b] = asymptotic_coefficients(sol, pot, disp);
        CHECK((a - A).norm() < 1e-8);
        CHECK((b - B).norm() < 1e-8);
    }
}

TEST_CASE("bounded solution: sweep cap raises NonConvergence") {
    auto pot = fixtures::n1_potential();
    pot.set_entry(Block::B21, 0, 0, fixtures::expo(2.0, 1.0));
    BoundedOptions o;
    o.max_sweeps = 2;
    CHECK_THROWS_AS(solve_bounded_solution(pot, disp_n(1), 0.5, vec({1.0}), vec({1.0}), o), NonConvergence);
}

TEST_CASE("transforms, AH, S and P for the triangular n = 1 system") {
    const cplx gamma(0.8, 0.3);
    MCanonicalPotential pot(1);
    pot.set_entry(Block::B12, 0, 0, fixtures::expo(gamma, 1.0));
    const auto disp = disp_n(1);
    const auto kernels = solve_to_kernels(pot, disp);
    const auto grid = LambdaGrid::cayley(100.0, 512);
    const auto bt = kernel_transforms(kernels, disp, grid);

    double err12 = 0.0, other = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx expect = kI * gamma / (1.0 - 2.0 * kI * grid[i]);
        err12 = std::max(err12, std::abs(bt.A12_plus[i](0, 0) - expect));
        other = std::max({other, std::abs(bt.A11_minus[i](0, 0)), std::abs(bt.A21_minus[i](0, 0)),
                          std::abs(bt.A22_plus[i](0, 0))});
    }
    CHECK(err12 < 1e-8);
    CHECK(other == 0.0);
    CHECK(std::abs(bt.A12_plus[grid.size() - 1](0, 0)) < 0.01);
    CHECK(bt.A12_plus.analyticity().kind == HalfPlane::Plus);
    CHECK(bt.A12_plus.analyticity().delta == doctest::Approx(0.5));
    CHECK(bt.A11_minus.analyticity().kind == HalfPlane::Minus);

    const cplx h(1.5, -0.5);
    Mat hm(1, 1);
    hm(0, 0) = h;
    const auto ah = assemble_AH(bt, BoundaryMatrix(hm));
    for (std::size_t i = 0; i < grid.size(); i += 37) {
        CHECK(std::abs(ah.plus[i](0, 0) + kI * h * gamma / (1.0 - 2.0 * kI * grid[i])) < 1e-8);
        CHECK(std::abs(ah.minus[i](0, 0)) == 0.0);
    }

    const auto tr = transmission_matrix(bt);
    for (std::size_t i = 0; i < grid.size(); i += 41) {
        const cplx a = kI * gamma / (1.0 - 2.0 * kI * grid[i]);
        CHECK(std::abs(tr.P[i](0, 1) - a) < 1e-8);
        CHECK(std::abs(tr.Pi[i](0, 1) + a) < 1e-8);
        CHECK(std::abs(tr.P[i].determinant() - 1.0) < 1e-14);
        CHECK(std::abs(tr.P[i](1, 0)) == 0.0);
    }
}

TEST_CASE("scattering matrix for h = gamma = 1 and its Neumann bound") {
    const auto pot = fixtures::n1_potential();
    const auto disp = disp_n(1);
    const auto grid = LambdaGrid::custom({-100.0, -0.5, 0.0, 3.0, 100.0});
    const auto bt = kernel_transforms(solve_to_kernels(pot, disp), disp, grid);
    const auto ah = assemble_AH(bt, BoundaryMatrix(Mat::Identity(1, 1)));
    const auto S = scattering_matrix(ah.plus, ah.minus);
    CHECK(std::abs(S[2](0, 0) - cplx(0.5, 0.5)) < 1e-8);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(S[i](0, 0) - fixtures::n1_scattering(grid[i])) < 1e-8);
    for (std::size_t i : {std::size_t(0), grid.size() - 1}) {
        const double d = (S[i] - Mat::Identity(1, 1)).norm();
        CHECK(d < 2.0 * ah.plus[i].norm() + ah.minus[i].norm());
    }

    const auto rep = strip_diagnostics(ah.plus, ah.minus);
    // |det(I + AH+)|^2 = (1 + (2 lambda + 1)^2) / (1 + 4 lambda^2): sqrt 2 at 0, minimum 1/sqrt 2 at -1/2
    CHECK(std::abs(1.0 + ah.plus[2](0, 0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(rep.real_axis.min_det_plus == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
    CHECK(rep.real_axis.argmin_plus == -0.5);
    CHECK(rep.real_axis.min_det_minus == 1.0);
    CHECK(rep.edge_residual_plus <= 0.01);
    CHECK(rep.edge_residual_minus == 0.0);
}

TEST_CASE("zero data: identity scattering, identity transmission, unit determinants") {
    const MCanonicalPotential pot(2);
    const auto disp = disp_n(2);
    const auto grid = LambdaGrid::cayley(50.0, 64);
    const auto bt = kernel_transforms(solve_to_kernels(pot, disp), disp, grid);
    CHECK(bt.A11_minus.sup_norm() == 0.0);
    CHECK(bt.A22_plus.sup_norm() == 0.0);
    std::mt19937_64 rng(2);
    const auto H = fixtures::random_boundary(rng, 2);
    const auto ah = assemble_AH(bt, H);
    CHECK(ah.plus.sup_norm() == 0.0);
    CHECK(ah.minus.sup_norm() == 0.0);
    const auto S = scattering_matrix(ah.plus, ah.minus);
    CHECK(S.max_abs_diff(LineMatrixFunction::identity(grid, 2)) == 0.0);
    const auto tr = transmission_matrix(bt);
    CHECK(tr.Pi.max_abs_diff(LineMatrixFunction::identity(grid, 4)) == 0.0);
    const auto rep = strip_diagnostics(ah.plus, ah.minus);
    CHECK(rep.real_axis.min_det_plus == 1.0);
    CHECK(rep.edge_residual_plus == 0.0);
}

TEST_CASE("assemble_AH with H = I is the block difference") {
    const auto pot = fixtures::n2_potential();
    const auto disp = disp_n(2);
    const auto grid = LambdaGrid::cayley(40.0, 64);
    const auto bt = kernel_transforms(solve_to_kernels(pot, disp), disp, grid);
    const auto ah = assemble_AH(bt, BoundaryMatrix(Mat::Identity(2, 2)));
    CHECK(ah.plus.max_abs_diff(bt.A22_plus - bt.A12_plus) < 1e-15);
    CHECK(ah.minus.max_abs_diff(bt.A11_minus - bt.A21_minus) < 1e-15);
}

TEST_CASE("singular factors are reported with the offending lambda") {
    const auto grid = LambdaGrid::uniform(1.0, 5);
    LineMatrixFunction plus(grid, 2), minus(grid, 2);
    plus[3] = -Mat::Identity(2, 2);
    try {
        (void)scattering_matrix(plus, minus);
        FAIL("expected SingularFactor");
    } catch (const SingularFactor& e) {
        CHECK(e.context().at("lambda") == doctest::Approx(grid[3]));
    }
    BlockTransforms bt{LineMatrixFunction(grid, 1), LineMatrixFunction(grid, 1), LineMatrixFunction(grid, 1),
                       LineMatrixFunction(grid, 1)};
    bt.A11_minus[1](0, 0) = -1.0;
    CHECK_THROWS_AS(transmission_matrix(bt), SingularP);
    Mat bad = Mat::Zero(1, 1);
    CHECK_THROWS_AS(BoundaryMatrix{bad}, SingularH);
}

TEST_CASE("representation consistency: P(lambda) (A, B) reproduces the bounded solution at x = 0") {
    const auto pot = fixtures::n2_potential();
    const auto disp = disp_n(2);
    const auto kernels = solve_to_kernels(pot, disp);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lam(-10.0, 10.0);
    std::vector<double> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(lam(rng));
    std::sort(pts.begin(), pts.end());
    const auto grid = LambdaGrid::custom(pts);
    const auto P = transmission_matrix(kernel_transforms(kernels, disp, grid)).P;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec A = fixtures::random_matrix(rng, 2).col(0), B = fixtures::random_matrix(rng, 2).col(0);
        Vec amp(4);
        amp << A, B;
        const auto sol = solve_bounded_solution(pot, disp, pts[i], A, B);
        CHECK((P[i] * amp - sol.y.front()).norm() < 1e-6 * amp.norm());
    }
}

TEST_CASE("boundary coupling: amplitudes with B = S_H H A give y2(0) = H y1(0)") {
    const auto pot = fixtures::n2_potential();
    const auto disp = disp_n(2);
    std::mt19937_64 rng(23);
    const auto H = fixtures::random_boundary(rng, 2);
    const auto grid = LambdaGrid::custom({-4.0, 0.0, 1.3, 9.0});
    KernelOptions ko;
    ko.step = 0.0025;
    const auto ah = assemble_AH(kernel_transforms(solve_to_kernels(pot, disp, ko), disp, grid), H);
    const auto S = scattering_matrix(ah.plus, ah.minus);
    BoundedOptions bo;
    bo.step = 0.0025;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec A = fixtures::random_matrix(rng, 2).col(0);
        const Vec B = S[i] * H.matrix() * A;
        // [I + AH+] B = [I + AH-] H A, by construction of S
        CHECK(((Mat::Identity(2, 2) + ah.plus[i]) * B - (Mat::Identity(2, 2) + ah.minus[i]) * H.matrix() * A).norm() <
              1e-12);
        const auto sol = solve_bounded_solution(pot, disp, grid[i], A, B, bo);
        CHECK((sol.y2(0) - H.matrix() * sol.y1(0)).norm() < 1e-6 * A.norm());
    }
}

TEST_CASE("S_H - I decreases along lambda = 10, 20, 40, 80") {
    const auto grid = LambdaGrid::custom({10.0, 20.0, 40.0, 80.0});
    std::mt19937_64 rng(29);
    for (const auto& [pot, disp] : {std::pair{fixtures::n1_potential(), disp_n(1)},
                                    std::pair{fixtures::n2_potential(), disp_n(2)}}) {
        const auto H = fixtures::random_boundary(rng, disp.n());
        const auto ah = assemble_AH(kernel_transforms(solve_to_kernels(pot, disp), disp, grid), H);
        const auto S = scattering_matrix(ah.plus, ah.minus);
        double prev = INFINITY;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = (S[i] - Mat::Identity(disp.n(), disp.n())).operatorNorm();
            CHECK(d < prev);
            prev = d;
        }
    }
}

TEST_CASE("strip estimate and shifted-line diagnostics") {
    const auto disp = Dispersion({-2.0, -1.0, 1.0, 4.0});
    CHECK(strip_estimate(0.5, 1.0, disp) == doctest::Approx(0.125));
    const auto pot = fixtures::n1_potential();
    const auto kernels = solve_to_kernels(pot, disp_n(1));
    const auto grid = LambdaGrid::cayley(50.0, 128);
    const BoundaryMatrix H(Mat::Identity(1, 1));
    const auto ah = assemble_AH(kernel_transforms(kernels, disp_n(1), grid), H);
    std::vector<ShiftedLine> lines{shifted_AH(kernels, disp_n(1), H, grid, 0.2)};
    const auto rep = strip_diagnostics(ah.plus, ah.minus, lines);
    REQUIRE(rep.shifted.size() == 1);
    CHECK(rep.shifted[0].delta == 0.2);
    // det(I + AH+) at lambda + 0.2 i: 1 - i / (1 - 2 i lambda + 0.4)
    double expect = INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i)
        expect = std::min(expect, std::abs(1.0 - kI / (1.4 - 2.0 * kI * grid[i])));
    CHECK(rep.shifted[0].min_det_plus == doctest::Approx(expect).epsilon(1e-7));
}
