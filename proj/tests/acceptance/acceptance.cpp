// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "isp/cayley.hpp"
#include "isp/errors.hpp"
#include "isp/example_e1.hpp"
#include "isp/forward.hpp"
#include "isp/rh.hpp"

using namespace isp;
namespace fx = isp::fixtures;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;  // seconds
    std::function<Outcome()> run;
};

const LambdaGrid& default_grid() {
    static const LambdaGrid g = LambdaGrid::cayley(1000.0, 4096);
    return g;
}

LineMatrixFunction forward_scattering(const MCanonicalPotential& pot, const Dispersion& disp, const BoundaryMatrix& H,
                                      const LambdaGrid& grid, const KernelOptions& ko = {}) {
    const TOKernels k = solve_to_kernels(pot, disp, ko);
    const auto blocks = kernel_transforms(k, disp, grid);
    const auto ah = assemble_AH(blocks, H);
    return scattering_matrix(ah.plus, ah.minus);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Outcome c1_zero_identity() {
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const auto disp = fx::disp_n(n);
        const MCanonicalPotential zero(n);
        const TOKernels k = solve_to_kernels(zero, disp);
        const auto blocks = kernel_transforms(k, disp, default_grid());
        for (int trial = 0; trial < 5; ++trial) {
            const auto H = fx::random_boundary(rng, n);
            const auto ah = assemble_AH(blocks, H);
            const auto S = scattering_matrix(ah.plus, ah.minus);
            worst = std::max(worst, S.max_abs_diff(LineMatrixFunction::identity(default_grid(), n)));
        }
    }
    return {worst <= 1e-12, fmt("max |S_H - I| = %.3e (tol 1e-12)", worst)};
}

Outcome c2_closed_form() {
    std::vector<double> pts;
    for (int i = 0; i <= 800; ++i) pts.push_back(-20.0 + 0.05 * i);
    const auto grid = LambdaGrid::custom(pts);
    const auto S = forward_scattering(fx::n1_potential(), fx::disp_n(1), BoundaryMatrix(Mat::Identity(1, 1)), grid);
    double worst = 0.0, at0 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double e = std::abs(S[i](0, 0) - fx::n1_scattering(grid[i]));
        worst = std::max(worst, e);
        if (grid[i] == 0.0 || std::abs(grid[i]) < 1e-12) at0 = std::abs(S[i](0, 0) - cplx(0.5, 0.5));
    }
    return {worst <= 1e-6 && at0 <= 1e-6,
            fmt("max err on [-20,20] = %.3e", worst) + fmt(", |S_H(0) - (0.5+0.5i)| = %.3e (tol 1e-6)", at0)};
}

double potential_rel_error(const MCanonicalPotential& a, const MCanonicalPotential& b, double x_end) {
    const int n = a.n();
    double worst = 0.0;
    for (Block blk : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const auto& pa = a.entry(blk, k, j);
                const auto& pb = b.entry(blk, k, j);
                if (pa.is_zero() && pb.is_zero()) continue;
                double num = 0.0, den = 0.0;
                for (double x = 0.0; x <= x_end + 1e-12; x += 0.01) {
                    num = std::max(num, std::abs(pa(x) - pb(x)));
                    den = std::max(den, std::abs(pa(x)));
                }
                worst = std::max(worst, den > 0.0 ? num / den : num);
            }
    return worst;
}

Outcome c3_kernel_identity() {
    double worst = 0.0;
    for (int n : {1, 2}) {
        const auto pot = n == 1 ? fx::n1_potential() : fx::n2_potential();
        const auto disp = fx::disp_n(n);
        const TOKernels k = solve_to_kernels(pot, disp);
        worst = std::max(worst, potential_rel_error(pot, potential_from_kernels(k, disp), 5.0));
    }
    return {worst <= 1e-6, fmt("max relative error on [0,5] = %.3e (tol 1e-6)", worst)};
}

Outcome c4_decay() {
    const TOKernels k = solve_to_kernels(fx::n1_potential(), fx::disp_n(1));
    const double slope = fit_decay_slope(k, Block::B12, 2.0, 30.0);
    return {slope >= -0.55 && slope <= -0.45, fmt("fitted slope = %.5f (target -0.5, window [-0.55,-0.45])", slope)};
}

Outcome c5_split() {
    RationalMatrix f(1);
    f.add_pole(Mat::Constant(1, 1, kI), cplx(0.0, -1.0));   // i / (lambda + i)
    f.add_pole(Mat::Constant(1, 1, -kI), cplx(0.0, 1.0));   // -i / (lambda - i)
    auto plus_true = [](double l) { return kI / (l + kI); };
    auto minus_true = [](double l) { return -kI / (l - kI); };

    const auto [rp, rm] = plemelj_split(f);
    double exact = 0.0;
    for (double l = -100.0; l <= 100.0; l += 0.01) {
        exact = std::max(exact, std::abs(rp(l)(0, 0) - plus_true(l)));
        exact = std::max(exact, std::abs(rm(l)(0, 0) - minus_true(l)));
    }

    const auto grid = LambdaGrid::cayley(100.0, 1 << 14);
    const auto split = plemelj_split(f.sample(grid));
    double numeric = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        numeric = std::max(numeric, std::abs(split.plus[i](0, 0) - plus_true(grid[i])));
        numeric = std::max(numeric, std::abs(split.minus[i](0, 0) - minus_true(grid[i])));
    }
    return {exact <= 1e-8 && numeric <= 1e-4,
            fmt("exact path %.3e (tol 1e-8)", exact) + fmt(", numeric path %.3e (tol 1e-4)", numeric)};
}

Outcome c6_rh() {
    std::mt19937_64 rng(77);
    const auto& grid = default_grid();
    double residual = 0.0, factor_err = 0.0;
    for (int m : {1, 2}) {
        for (int trial = 0; trial < 2; ++trial) {
            const auto plus = fx::random_rational(rng, m, 2, true, 0.2).sample(grid);
            const auto minus = fx::random_rational(rng, m, 2, false, 0.2).sample(grid);
            const auto I = LineMatrixFunction::identity(grid, m);
            LineMatrixFunction S(grid, m);
            for (std::size_t i = 0; i < grid.size(); ++i)
                S[i] = (I[i] + plus[i]).partialPivLu().solve(I[i] + minus[i]);
            const auto res = solve_regular_rh(S);
            residual = std::max(residual, res.factorization_residual);
            factor_err = std::max({factor_err, res.AH_plus.max_abs_diff(plus), res.AH_minus.max_abs_diff(minus)});
        }
    }
    return {residual <= 1e-5 && factor_err <= 1e-5,
            fmt("residual %.3e", residual) + fmt(", factor error %.3e (tol 1e-5)", factor_err)};
}

Outcome c7_block_recovery() {
    const auto sys = fx::e1_fixture();
    const auto disp = sys.disp();
    const auto pot = sys.embed();
    const auto& grid = default_grid();
    const TOKernels k = solve_to_kernels(pot, disp);
    const auto blocks = kernel_transforms(k, disp, grid);

    Mat h1(2, 2), h2(2, 2);
    h1 << 1.0, 0.3, -0.2, 1.0;
    h2 << cplx(0.5, 0.2), -0.4, 0.1, cplx(1.5, -0.3);
    const BoundaryMatrix H1(h1), H2(h2);
    std::vector<RHResult> fac;
    for (const auto* H : {&H1, &H2}) {
        const auto ah = assemble_AH(blocks, *H);
        fac.push_back(solve_regular_rh(scattering_matrix(ah.plus, ah.minus)));
    }
    const auto rec = recover_blocks(fac[0].AH_plus, fac[0].AH_minus, fac[1].AH_plus, fac[1].AH_minus, H1, H2);
    const double err = std::max({rec.blocks.A11_minus.max_abs_diff(blocks.A11_minus),
                                 rec.blocks.A21_minus.max_abs_diff(blocks.A21_minus),
                                 rec.blocks.A12_plus.max_abs_diff(blocks.A12_plus),
                                 rec.blocks.A22_plus.max_abs_diff(blocks.A22_plus)});
    return {err <= 1e-5 && rec.a22_disagreement <= 1e-8,
            fmt("block error %.3e (tol 1e-5)", err) + fmt(", A22+ expressions differ by %.3e (tol 1e-8)",
                                                         rec.a22_disagreement)};
}

Outcome c8_e1_roundtrip() {
    const auto sys = fx::e1_fixture();
    const auto& grid = default_grid();
    const auto S = e1_scattering(sys, fx::e1_boundary(1.0), grid);
    double s12 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        s12 = std::max(s12, std::abs(S[i](0, 1) - kI / (1.0 + 3.0 * kI * grid[i])));
    const auto rep = e1_roundtrip(sys, fx::e1_boundary(1.0), fx::e1_boundary(2.0), grid);
    return {rep.max_rel_error <= 1e-4 && s12 <= 1e-6,
            fmt("max relative error %.3e (tol 1e-4)", rep.max_rel_error) + fmt(", S_12 error %.3e (tol 1e-6)", s12)};
}

Outcome c9_nonuniqueness() {
    const auto sys = fx::e1_fixture();
    const auto& grid = default_grid();
    const double ds = 0.02, s_max = 30.0;
    auto profiles_for = [&](cplx h) {
        const auto S = e1_scattering(sys, fx::e1_boundary(h), grid);
        return e1_invert_transforms(e1_split(S), ds, s_max);
    };
    const auto p1 = profiles_for(1.0);
    std::string detail;
    bool ok = true;
    try {
        (void)e1_solve_coefficients({p1}, {fx::e1_boundary(1.0)}, sys.disp());
        ok = false;
        detail = "single boundary solved without rank loss";
    } catch (const RankDeficient& e) {
        ok = ok && e.deficiency() == 1 && e.deficient_points() == e.total_points();
        detail = "single: deficiency " + std::to_string(e.deficiency()) + " at " + std::to_string(e.deficient_points()) +
                 "/" + std::to_string(e.total_points());
    }
    try {
        (void)e1_solve_coefficients({p1, p1}, {fx::e1_boundary(1.0), fx::e1_boundary(1.0)}, sys.disp());
        ok = false;
        detail += "; equal pair solved without rank loss";
    } catch (const RankDeficient& e) {
        ok = ok && e.deficient_points() == e.total_points();
        detail += "; equal pair: " + std::to_string(e.deficient_points()) + "/" + std::to_string(e.total_points());
    }
    return {ok, detail};
}

Outcome c10_asymptotics() {
    std::vector<double> pts{-80, -40, -20, -10, 10, 20, 40, 80};
    const auto grid = LambdaGrid::custom(pts);
    std::vector<std::pair<std::string, LineMatrixFunction>> cases;
    cases.emplace_back("n1", forward_scattering(fx::n1_potential(), fx::disp_n(1), BoundaryMatrix(Mat::Identity(1, 1)), grid));
    {
        Mat h(2, 2);
        h << 1.0, 0.3, -0.2, 1.0;
        cases.emplace_back("n2", forward_scattering(fx::n2_potential(), fx::disp_n(2), BoundaryMatrix(h), grid));
    }
    cases.emplace_back("e1", e1_scattering(fx::e1_fixture(), fx::e1_boundary(1.0), grid));
    {
        const auto sys = fx::e1_fixture();
        Mat h(2, 2);
        h << cplx(0.5, 0.2), -0.4, 0.1, cplx(1.5, -0.3);
        cases.emplace_back("e1-embedded", forward_scattering(sys.embed(), sys.disp(), BoundaryMatrix(h), grid));
    }
    bool ok = true;
    std::string detail;
    for (const auto& [name, S] : cases) {
        std::array<double, 4> d{};  // |lambda| = 10, 20, 40, 80
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double l = std::abs(grid[i]);
            const std::size_t slot = l < 15 ? 0 : l < 30 ? 1 : l < 60 ? 2 : 3;
            const Mat diff = S[i] - Mat::Identity(S.m(), S.m());
            d[slot] = std::max(d[slot], diff.operatorNorm());
        }
        const bool dec = d[0] > d[1] && d[1] > d[2] && d[2] > d[3];
        ok = ok && dec && d[3] <= 0.05;
        if (!detail.empty()) detail += "; ";
        detail += name + fmt(" %.2e", d[0]) + fmt(">%.2e", d[1]) + fmt(">%.2e", d[2]) + fmt(">%.2e", d[3]);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<Criterion> all{
        {1, "zero-potential identity", 5.0, c1_zero_identity},
        {2, "n=1 closed-form scattering", 10.0, c2_closed_form},
        {3, "kernel trace identity", 60.0, c3_kernel_identity},
        {4, "kernel decay slope", 10.0, c4_decay},
        {5, "Plemelj split", 5.0, c5_split},
        {6, "regular RH solve", 60.0, c6_rh},
        {7, "block recovery from two factorizations", 60.0, c7_block_recovery},
        {8, "coupled example round trip", 60.0, c8_e1_roundtrip},
        {9, "non-uniqueness witnesses", 10.0, c9_nonuniqueness},
        {10, "large-lambda asymptotics", 5.0, c10_asymptotics},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const Error& e) {
            o = {false, e.name() + ": " + e.what()};
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("[%s] criterion %2d  %-40s %s; %.2fs (limit %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    o.detail.c_str(), secs, c.time_limit);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
