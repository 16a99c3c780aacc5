#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "isp/errors.hpp"
#include "isp/forward.hpp"
#include "isp/rh.hpp"

using namespace isp;
using fixtures::disp_n;

namespace {

const LambdaGrid& grid() {
    static const LambdaGrid g = LambdaGrid::cayley(1000.0, 2048);
    return g;
}

LineMatrixFunction scalar(const LambdaGrid& g, auto&& f) {
    return LineMatrixFunction::from_function(g, 1, [&](double l) {
        Mat m(1, 1);
        m(0, 0) = f(l);
        return m;
    });
}

// Factorization residual max |(I + A+) S - (I + A-)|.
double residual(const LineMatrixFunction& S, const LineMatrixFunction& ap, const LineMatrixFunction& am) {
    const Mat I = Mat::Identity(S.m(), S.m());
    double r = 0.0;
    for (std::size_t j = 0; j < S.size(); ++j)
        r = std::max(r, ((I + ap[j]) * S[j] - (I + am[j])).cwiseAbs().maxCoeff());
    return r;
}

}  // namespace

TEST_CASE("identity scattering factors trivially") {
    const auto r = solve_regular_rh(LineMatrixFunction::identity(grid(), 2));
    CHECK(r.AH_plus.sup_norm() == 0.0);
    CHECK(r.AH_minus.sup_norm() == 0.0);
}

TEST_CASE("scalar n = 1 scattering: AH+ = -i/(1 - 2 i lambda), AH- = 0") {
    const auto S = scalar(grid(), fixtures::n1_scattering);
    const auto r = solve_regular_rh(S);
    const auto expect = scalar(grid(), [](double l) { return -kI / (1.0 - 2.0 * kI * l); });
    CHECK(r.AH_plus.max_abs_diff(expect) < 1e-8);
    CHECK(r.AH_minus.sup_norm() < 1e-8);
    CHECK(r.factorization_residual < 1e-8);
    CHECK(residual(S, r.AH_plus, r.AH_minus) < 1e-8);
}

TEST_CASE("synthetic factorization of random rational factors is recovered") {
    std::mt19937_64 rng(53);
    for (int m : {1, 2, 3}) {
        const auto ap = fixtures::random_rational(rng, m, 2, true, 0.2).sample(grid());
        const auto am = fixtures::random_rational(rng, m, 2, false, 0.2).sample(grid());
        const Mat I = Mat::Identity(m, m);
        LineMatrixFunction S(grid(), m);
        for (std::size_t j = 0; j < grid().size(); ++j) S[j] = (I + ap[j]).inverse() * (I + am[j]);
        const auto r = solve_regular_rh(S);
        CHECK(r.AH_plus.max_abs_diff(ap) < 1e-6);
        CHECK(r.AH_minus.max_abs_diff(am) < 1e-6);
        CHECK(residual(S, r.AH_plus, r.AH_minus) < 1e-8);
        CHECK(wrong_side_content(r.AH_plus, HalfPlane::Plus) < 1e-6);
        CHECK(wrong_side_content(r.AH_minus, HalfPlane::Minus) < 1e-6);
        CHECK(r.probe_sigma_min > 0.1);
    }
}

TEST_CASE("nonzero index is detected: S = (lambda + i)/(lambda - i)") {
    const auto S = scalar(grid(), [](double l) { return (l + kI) / (l - kI); });
    RHOptions o;
    o.edge_tol = 1e-2;
    try {
        (void)solve_regular_rh(S, o);
        FAIL("expected FredholmSingular");
    } catch (const FredholmSingular& e) {
        CHECK(std::abs(e.context().at("winding_number")) == 1.0);
    }
}

TEST_CASE("det S vanishing on a grid node raises SingularScattering") {
    const double l0 = grid()[1500];
    const auto S = scalar(grid(), [&](double l) { return (l - l0) / (l + kI); });
    try {
        (void)solve_regular_rh(S);
        FAIL("expected SingularScattering");
    } catch (const SingularScattering& e) {
        CHECK(e.context().at("lambda") == l0);
    }
}

TEST_CASE("non-decaying S - I is refused") {
    const auto S = scalar(grid(), [](double) { return cplx(2.0); });
    CHECK_THROWS_AS(solve_regular_rh(S), EdgeDecayViolation);
}

TEST_CASE("round trip: forward factors are recovered and the blocks reassembled") {
    const auto pot = fixtures::n2_potential();
    const auto disp = disp_n(2);
    const auto bt = kernel_transforms(solve_to_kernels(pot, disp), disp, grid());
    std::mt19937_64 rng(59);
    const auto H1 = fixtures::random_boundary(rng, 2);
    const auto H2 = fixtures::random_boundary(rng, 2);
    std::vector<LineMatrixFunction> plus, minus;
    for (const BoundaryMatrix* H : {&H1, &H2}) {
        const auto ah = assemble_AH(bt, *H);
        const auto r = solve_regular_rh(scattering_matrix(ah.plus, ah.minus));
        CHECK(r.AH_plus.max_abs_diff(ah.plus) < 1e-5);
        CHECK(r.AH_minus.max_abs_diff(ah.minus) < 1e-5);
        plus.push_back(r.AH_plus);
        minus.push_back(r.AH_minus);
    }
    const auto rec = recover_blocks(plus[0], minus[0], plus[1], minus[1], H1, H2);
    CHECK(rec.blocks.A11_minus.max_abs_diff(bt.A11_minus) < 1e-5);
    CHECK(rec.blocks.A21_minus.max_abs_diff(bt.A21_minus) < 1e-5);
    CHECK(rec.blocks.A12_plus.max_abs_diff(bt.A12_plus) < 1e-5);
    CHECK(rec.blocks.A22_plus.max_abs_diff(bt.A22_plus) < 1e-5);
    CHECK(rec.a22_disagreement < 1e-8);
}

TEST_CASE("recover_blocks: zero data, the n = 1 example, consistency of the two forms") {
    const auto g = LambdaGrid::cayley(100.0, 256);
    const LineMatrixFunction z(g, 1);
    Mat h1(1, 1), h2(1, 1);
    h1(0, 0) = 1.0;
    h2(0, 0) = 2.0;
    const BoundaryMatrix H1(h1), H2(h2);
    const auto zero = recover_blocks(z, z, z, z, H1, H2);
    CHECK(zero.blocks.A12_plus.sup_norm() == 0.0);
    CHECK(zero.blocks.A22_plus.sup_norm() == 0.0);

    const auto disp = disp_n(1);
    const auto bt = kernel_transforms(solve_to_kernels(fixtures::n1_potential(), disp), disp, g);
    const auto a1 = assemble_AH(bt, H1), a2 = assemble_AH(bt, H2);
    const auto rec = recover_blocks(a1.plus, a1.minus, a2.plus, a2.minus, H1, H2);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(std::abs(rec.blocks.A12_plus[j](0, 0) - kI / (1.0 - 2.0 * kI * g[j])) < 1e-8);
    CHECK(rec.blocks.A11_minus.sup_norm() < 1e-14);
    CHECK(rec.blocks.A21_minus.sup_norm() < 1e-14);
    CHECK(rec.blocks.A22_plus.sup_norm() < 1e-14);
    CHECK(rec.a22_disagreement <= 1e-8);
}

TEST_CASE("recover_blocks failure modes") {
    const auto g = LambdaGrid::cayley(100.0, 256);
    const auto disp = disp_n(2);
    std::mt19937_64 rng(61);
    const auto H1 = fixtures::random_boundary(rng, 2);
    const auto bt = kernel_transforms(solve_to_kernels(fixtures::n2_potential(), disp), disp, g);
    const auto a1 = assemble_AH(bt, H1);
    CHECK_THROWS_AS(recover_blocks(a1.plus, a1.minus, a1.plus, a1.minus, H1, H1), DegenerateBoundaryPair);

    // a pair from a different potential: both forms of A22 and A21 still agree, by algebra
    MCanonicalPotential other(2);
    other.set_entry(Block::B12, 1, 1, fixtures::expo(0.5, 1.0));
    const auto H2 = fixtures::random_boundary(rng, 2);
    const auto a2 = assemble_AH(kernel_transforms(solve_to_kernels(other, disp), disp, g), H2);
    const auto mixed = recover_blocks(a1.plus, a1.minus, a2.plus, a2.minus, H1, H2);
    CHECK(mixed.a22_disagreement < 1e-12);
    CHECK(mixed.a21_disagreement < 1e-12);

    // non-finite samples fail the consistency check
    auto bad = a2.plus;
    bad[7](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(recover_blocks(a1.plus, a1.minus, bad, a2.minus, H1, H2), InconsistentInputs);
}

TEST_CASE("solvability report") {
    const auto I = LineMatrixFunction::identity(grid(), 2);
    const auto ri = solvability_report(I);
    CHECK(ri.min_abs_det == 1.0);
    CHECK(ri.nonsingular);
    CHECK(ri.real_part_definite);
    CHECK(ri.edge_residual == 0.0);

    const auto g = LambdaGrid::uniform(10.0, 20001);
    const auto S = scalar(g, fixtures::n1_scattering);
    const auto r = solvability_report(S);
    // |S(0)| = 1/sqrt 2; the minimum over the line is sqrt((3 - sqrt 5)/2), at 2 lambda = (sqrt 5 - 1)/2
    CHECK(std::abs(fixtures::n1_scattering(0.0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(r.min_abs_det == doctest::Approx(std::sqrt((3.0 - std::sqrt(5.0)) / 2.0)).epsilon(1e-6));
    CHECK(r.argmin_lambda == doctest::Approx((std::sqrt(5.0) - 1.0) / 4.0).epsilon(1e-3));
    CHECK(r.nonsingular);

    const auto hand = LineMatrixFunction::from_function(LambdaGrid::custom({-1.0, 0.0, 1.0}), 2, [](double l) {
        Mat m = Mat::Identity(2, 2);
        m(0, 0) = l / (l + kI);
        return m;
    });
    CHECK_FALSE(solvability_report(hand).nonsingular);
}
