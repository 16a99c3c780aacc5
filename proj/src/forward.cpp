#include "isp/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isp/errors.hpp"
#include "isp/quadrature.hpp"

namespace isp {

namespace {

struct SampledPotential {
    int dim;
    std::vector<std::pair<int, int>> nonzero;  // (r, c) of non-zero entries
    std::vector<std::vector<cplx>> values;     // per non-zero entry, per x sample
};

SampledPotential sample_potential(const MCanonicalPotential& pot, std::size_t nx, double h) {
    SampledPotential s{2 * pot.n(), {}, {}};
    for (int r = 0; r < s.dim; ++r)
        for (int c = 0; c < s.dim; ++c) {
            const auto& p = pot.full_entry(r, c);
            if (p.is_zero()) continue;
            std::vector<cplx> v(nx);
            for (std::size_t i = 0; i < nx; ++i) v[i] = p(double(i) * h);
            s.nonzero.emplace_back(r, c);
            s.values.push_back(std::move(v));
        }
    return s;
}

void check_dims(const MCanonicalPotential& pot, const Dispersion& disp) {
    if (pot.n() != disp.n()) throw InvalidArgument("potential and dispersion disagree on n");
}

}  // namespace

BoundedSolution solve_bounded_solution(const MCanonicalPotential& pot, const Dispersion& disp, double lambda,
                                       const Vec& A, const Vec& B, const BoundedOptions& opts) {
    check_dims(pot, disp);
    const int n = pot.n(), dim = 2 * n;
    if (A.size() != n || B.size() != n) throw InvalidArgument("amplitude vectors must have length n");
    if (!(opts.step > 0.0)) throw ValidationError("bounded-solution step must be positive");

    const double x_max = std::max(truncation_length(pot.envelope(), opts.tail_tol), 2.0 * opts.step);
    const std::size_t nx = static_cast<std::size_t>(std::ceil(x_max / opts.step)) + 1;
    const double h = opts.step;
    const auto q = sample_potential(pot, nx, h);

    Vec amp(dim);
    amp << A, B;
    // u = e^{-i lambda sigma x} y solves u_r = amp_r + i sum_c int_x^inf Q_rc e^{i lambda (xi_c - xi_r) s} u_c
    std::vector<std::vector<cplx>> u(dim), next(dim);
    for (int r = 0; r < dim; ++r) u[r].assign(nx, amp(r));

    BoundedSolution sol;
    sol.lambda = lambda;
    sol.step = h;
    sol.A = A;
    sol.B = B;
    int sweep = 0;
    std::vector<cplx> f(nx);
    for (;; ++sweep) {
        if (q.nonzero.empty()) break;
        if (sweep >= opts.max_sweeps)
            throw NonConvergence("bounded solution did not converge", {{"lambda", lambda}, {"sweeps", double(sweep)}});
        for (int r = 0; r < dim; ++r) next[r].assign(nx, amp(r));
        for (std::size_t e = 0; e < q.nonzero.size(); ++e) {
            const auto [r, c] = q.nonzero[e];
            for (std::size_t i = 0; i < nx; ++i) f[i] = q.values[e][i] * u[c][i];
            const auto tail = tail_integrals(f, 0.0, h, lambda * (disp[c] - disp[r]));
            for (std::size_t i = 0; i < nx; ++i) next[r][i] += kI * tail[i];
        }
        double change = 0.0, scale = 1.0;
        for (int r = 0; r < dim; ++r)
            for (std::size_t i = 0; i < nx; ++i) {
                change = std::max(change, std::abs(next[r][i] - u[r][i]));
                scale = std::max(scale, std::abs(next[r][i]));
            }
        std::swap(u, next);
        if (change <= opts.sweep_tol * scale) {
            ++sweep;
            break;
        }
    }
    sol.sweeps = sweep;
    sol.x.resize(nx);
    sol.y.assign(nx, Vec(dim));
    for (std::size_t i = 0; i < nx; ++i) {
        sol.x[i] = double(i) * h;
        for (int r = 0; r < dim; ++r) sol.y[i](r) = std::exp(kI * lambda * disp[r] * sol.x[i]) * u[r][i];
    }
    return sol;
}

std::pair<Vec, Vec> asymptotic_coefficients(const BoundedSolution& sol, const MCanonicalPotential& pot,
                                            const Dispersion& disp) {
    check_dims(pot, disp);
    const int n = pot.n(), dim = 2 * n;
    const std::size_t nx = sol.x.size();
    const auto q = sample_potential(pot, nx, sol.step);
    Vec amp = sol.y.front();
    std::vector<cplx> f(nx);
    for (std::size_t e = 0; e < q.nonzero.size(); ++e) {
        const auto [r, c] = q.nonzero[e];
        // same integrand representation as the solver, so the identity is exact up to the sweep tolerance
        for (std::size_t i = 0; i < nx; ++i)
            f[i] = q.values[e][i] * std::exp(-kI * sol.lambda * disp[c] * sol.x[i]) * sol.y[i](c);
        amp(r) -= kI * full_integral(f, 0.0, sol.step, sol.lambda * (disp[c] - disp[r]));
    }
    return {amp.head(n), amp.tail(dim - n)};
}

// ---------------------------------------------------------------------------

namespace {

template <class Lambda>
std::array<Mat, 4> transforms_at(const TOKernels& k, const Dispersion& disp, Lambda lambda,
                                 const std::vector<std::pair<int, int>>& active) {
    const int n = k.n();
    std::array<Mat, 4> out{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
    for (const auto& [r, c] : active) {
        const cplx v = full_integral(k.origin_row(r, c), 0.0, k.step(), cplx(lambda) * disp[c]);
        const bool lower = r >= n, right = c >= n;
        const int slot = right ? (lower ? 3 : 2) : (lower ? 1 : 0);
        out[slot](r - (lower ? n : 0), c - (right ? n : 0)) = v;
    }
    return out;
}

std::vector<std::pair<int, int>> active_entries(const TOKernels& k) {
    std::vector<std::pair<int, int>> act;
    for (int r = 0; r < k.dim(); ++r)
        for (int c = 0; c < k.dim(); ++c) {
            const auto row = k.origin_row(r, c);
            if (std::any_of(row.begin(), row.end(), [](cplx v) { return v != cplx(0.0); })) act.emplace_back(r, c);
        }
    return act;
}

}  // namespace

double strip_estimate(double theta, double eps, const Dispersion& disp) {
    return std::min(-theta * eps / disp.first(), theta * eps / disp.last());
}

BlockTransforms kernel_transforms(const TOKernels& kernels, const Dispersion& disp, const LambdaGrid& grid) {
    if (kernels.n() != disp.n()) throw InvalidArgument("kernels and dispersion disagree on n");
    const int n = kernels.n();
    const Analyticity minus{HalfPlane::Minus, -kernels.theta() * kernels.eps() / disp.first()};
    const Analyticity plus{HalfPlane::Plus, kernels.theta() * kernels.eps() / disp.last()};
    BlockTransforms bt{LineMatrixFunction(grid, n, minus), LineMatrixFunction(grid, n, minus),
                       LineMatrixFunction(grid, n, plus), LineMatrixFunction(grid, n, plus)};
    const auto act = active_entries(kernels);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto t = transforms_at(kernels, disp, grid[i], act);
        bt.A11_minus[i] = t[0];
        bt.A21_minus[i] = t[1];
        bt.A12_plus[i] = t[2];
        bt.A22_plus[i] = t[3];
    }
    return bt;
}

std::vector<std::array<Mat, 4>> kernel_transforms_at(const TOKernels& kernels, const Dispersion& disp,
                                                     std::span<const cplx> lambdas) {
    if (kernels.n() != disp.n()) throw InvalidArgument("kernels and dispersion disagree on n");
    const auto act = active_entries(kernels);
    std::vector<std::array<Mat, 4>> out(lambdas.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < lambdas.size(); ++i) out[i] = transforms_at(kernels, disp, lambdas[i], act);
    return out;
}

namespace {

std::pair<Mat, Mat> ah_point(const Mat& a11, const Mat& a21, const Mat& a12, const Mat& a22, const BoundaryMatrix& H) {
    const Mat& h = H.matrix();
    const Mat& hi = H.inverse();
    return {a22 - h * a12, h * a11 * hi - a21 * hi};
}

}  // namespace

AHPair assemble_AH(const BlockTransforms& b, const BoundaryMatrix& H) {
    require_same_grid({&b.A11_minus, &b.A21_minus, &b.A12_plus, &b.A22_plus});
    if (H.n() != b.A11_minus.m()) throw InvalidArgument("boundary matrix size differs from block size");
    const auto& grid = b.A11_minus.grid();
    AHPair out{LineMatrixFunction(grid, H.n(), b.A12_plus.analyticity()),
               LineMatrixFunction(grid, H.n(), b.A11_minus.analyticity())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto [p, m] = ah_point(b.A11_minus[i], b.A21_minus[i], b.A12_plus[i], b.A22_plus[i], H);
        out.plus[i] = std::move(p);
        out.minus[i] = std::move(m);
    }
    return out;
}

LineMatrixFunction scattering_matrix(const LineMatrixFunction& AH_plus, const LineMatrixFunction& AH_minus,
                                     double singular_tol, double strip) {
    require_same_grid({&AH_plus, &AH_minus});
    const int m = AH_plus.m();
    const Mat I = Mat::Identity(m, m);
    LineMatrixFunction S(AH_plus.grid(), m, {HalfPlane::Strip, strip});
    for (std::size_t i = 0; i < S.size(); ++i) {
        const Mat f = I + AH_plus[i];
        const Eigen::PartialPivLU<Mat> lu(f);
        const double d = std::abs(lu.determinant());
        if (!(d > singular_tol))
            throw SingularFactor("det(I + AH+) vanishes on the real axis",
                                 {{"lambda", AH_plus.grid()[i]}, {"abs_det", d}});
        S[i] = lu.solve(I + AH_minus[i]);
    }
    return S;
}

Transmission transmission_matrix(const BlockTransforms& b, double singular_tol) {
    require_same_grid({&b.A11_minus, &b.A21_minus, &b.A12_plus, &b.A22_plus});
    const int n = b.A11_minus.m();
    const auto& grid = b.A11_minus.grid();
    Transmission t{LineMatrixFunction(grid, 2 * n), LineMatrixFunction(grid, 2 * n)};
    const Mat I = Mat::Identity(n, n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat P(2 * n, 2 * n);
        P << I + b.A11_minus[i], b.A12_plus[i], b.A21_minus[i], I + b.A22_plus[i];
        const Eigen::PartialPivLU<Mat> lu(P);
        const double d = std::abs(lu.determinant());
        if (!(d > singular_tol))
            throw SingularP("transmission factor P is singular", {{"lambda", grid[i]}, {"abs_det", d}});
        t.Pi[i] = lu.inverse();
        t.P[i] = std::move(P);
    }
    return t;
}

ShiftedLine shifted_AH(const TOKernels& kernels, const Dispersion& disp, const BoundaryMatrix& H,
                       const LambdaGrid& grid, double delta) {
    std::vector<cplx> pts(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pts[i] = cplx(grid[i], delta);
    const auto tr = kernel_transforms_at(kernels, disp, pts);
    ShiftedLine line{delta, std::vector<Mat>(grid.size()), std::vector<Mat>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto [p, m] = ah_point(tr[i][0], tr[i][1], tr[i][2], tr[i][3], H);
        line.AH_plus[i] = std::move(p);
        line.AH_minus[i] = std::move(m);
    }
    return line;
}

namespace {

template <class Get>
LineDeterminants line_minima(std::size_t count, int m, std::span<const double> lambdas, double delta, Get get) {
    LineDeterminants d;
    d.delta = delta;
    d.min_det_plus = d.min_det_minus = std::numeric_limits<double>::infinity();
    const Mat I = Mat::Identity(m, m);
    for (std::size_t i = 0; i < count; ++i) {
        const auto [p, mi] = get(i);
        const double dp = std::abs((I + p).determinant());
        const double dm = std::abs((I + mi).determinant());
        if (dp < d.min_det_plus) {
            d.min_det_plus = dp;
            d.argmin_plus = lambdas[i];
        }
        if (dm < d.min_det_minus) {
            d.min_det_minus = dm;
            d.argmin_minus = lambdas[i];
        }
    }
    return d;
}

}  // namespace

StripReport strip_diagnostics(const LineMatrixFunction& AH_plus, const LineMatrixFunction& AH_minus,
                              std::span<const ShiftedLine> shifted) {
    require_same_grid({&AH_plus, &AH_minus});
    const int m = AH_plus.m();
    const auto lambdas = AH_plus.grid().points();
    StripReport rep;
    rep.real_axis = line_minima(AH_plus.size(), m, lambdas, 0.0, [&](std::size_t i) {
        return std::pair<const Mat&, const Mat&>(AH_plus[i], AH_minus[i]);
    });
    for (const auto& line : shifted) {
        if (line.AH_plus.size() != AH_plus.size()) throw GridMismatch("shifted line has the wrong length");
        rep.shifted.push_back(line_minima(line.AH_plus.size(), m, lambdas, line.delta, [&](std::size_t i) {
            return std::pair<const Mat&, const Mat&>(line.AH_plus[i], line.AH_minus[i]);
        }));
    }
    const Mat I = Mat::Identity(m, m);
    for (std::size_t i : {std::size_t{0}, AH_plus.size() - 1}) {
        rep.edge_residual_plus = std::max(rep.edge_residual_plus, std::abs((I + AH_plus[i]).determinant() - 1.0));
        rep.edge_residual_minus = std::max(rep.edge_residual_minus, std::abs((I + AH_minus[i]).determinant() - 1.0));
    }
    return rep;
}

}  // namespace isp
