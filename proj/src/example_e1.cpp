#include "isp/example_e1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isp/cayley.hpp"
#include "isp/errors.hpp"
#include "isp/quadrature.hpp"

namespace isp {

E1System::E1System(Dispersion disp, std::vector<ScalarProfile> c_first, std::vector<ScalarProfile> c_last)
    : disp_(std::move(disp)), first_(std::move(c_first)), last_(std::move(c_last)) {
    const int n = disp_.n();
    if (n < 2) throw ValidationError("the coupled example needs n >= 2");
    const std::size_t count = std::size_t(2 * n - 2);
    if (first_.size() != count || last_.size() != count)
        throw ValidationError("the example needs 2n - 2 profiles per coupling family");
}

bool E1System::is_exp_sum() const {
    auto ok = [](const ScalarProfile& p) { return p.is_exp_sum(); };
    return std::all_of(first_.begin(), first_.end(), ok) && std::all_of(last_.begin(), last_.end(), ok);
}

MCanonicalPotential E1System::embed() const {
    const int n = this->n();
    MCanonicalPotential pot(n);
    auto place = [&](int row, int col, const ScalarProfile& p) {
        if (p.is_zero()) return;
        const bool lo = row >= n, ri = col >= n;
        const Block b = lo ? (ri ? Block::B22 : Block::B21) : (ri ? Block::B12 : Block::B11);
        pot.set_entry(b, row - (lo ? n : 0), col - (ri ? n : 0), p.scaled(-1.0));
    };
    for (int k = 2; k <= 2 * n - 1; ++k) {
        place(k - 1, 0, c_first(k));
        place(k - 1, 2 * n - 1, c_last(k));
    }
    return pot;
}

E1Boundary::E1Boundary(Mat h1, double singular_tol) : h1_(std::move(h1)) {
    if (h1_.rows() != h1_.cols() || h1_.rows() < 1) throw InvalidArgument("H1 block must be square and non-empty");
    const double d = std::abs(h1_.determinant());
    if (!(d > singular_tol)) throw SingularH("H1 block is singular", {{"abs_det", d}});
}

Mat E1Boundary::full() const {
    const int n = this->n();
    Mat h = Mat::Zero(n, n);
    h.block(0, 1, n - 1, n - 1) = h1_;
    h(n - 1, 0) = 1.0;
    return h;
}

namespace {

void check_n(const E1System& sys, const E1Boundary& bnd) {
    if (sys.n() != bnd.n()) throw InvalidArgument("system and boundary disagree on n");
}

// C_{k-}(lambda) and C_{k+}(lambda) at complex or real lambda.
std::pair<cplx, cplx> parts_at(const E1System& sys, const E1Boundary& bnd, int k, double lambda) {
    const int n = sys.n();
    const auto& x = sys.disp();
    auto xi = [&](int one_based) { return x[std::size_t(one_based - 1)]; };
    // int_0^inf (1/D) c(s/D) e^{-+ i lambda s} ds = int_0^inf c(t) e^{-+ i lambda D t} dt
    cplx minus = sys.c_first(n + k).tail_transform(0.0, -lambda * (xi(n + k) - xi(1)));
    cplx plus = sys.c_last(n + k).tail_transform(0.0, lambda * (xi(2 * n) - xi(n + k)));
    for (int j = 2; j <= n; ++j) {
        const cplx h = bnd.h(k, j);
        if (h == cplx(0.0)) continue;
        minus -= h * sys.c_first(j).tail_transform(0.0, -lambda * (xi(j) - xi(1)));
        plus -= h * sys.c_last(j).tail_transform(0.0, lambda * (xi(2 * n) - xi(j)));
    }
    return {kI * minus, kI * plus};
}

}  // namespace

LineMatrixFunction e1_scattering(const E1System& sys, const E1Boundary& bnd, const LambdaGrid& grid) {
    check_n(sys, bnd);
    const int n = sys.n();
    LineMatrixFunction S = LineMatrixFunction::identity(grid, n);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (int k = 1; k <= n - 1; ++k) {
            const auto [m, p] = parts_at(sys, bnd, k, grid[i]);
            S[i](k - 1, n - 1) = m + p;
        }
    return S;
}

RationalMatrix e1_scattering_rational(const E1System& sys, const E1Boundary& bnd) {
    check_n(sys, bnd);
    if (!sys.is_exp_sum()) throw InvalidArgument("exact rational form needs exponential-sum profiles");
    const int n = sys.n();
    const auto& x = sys.disp();
    auto xi = [&](int one_based) { return x[std::size_t(one_based - 1)]; };
    RationalMatrix R(n);
    auto add = [&](int k, const ScalarProfile& p, cplx weight, double delta, bool minus) {
        for (const auto& t : p.terms()) {
            // gamma / (a +- i lambda delta) as a simple pole
            Mat res = Mat::Zero(n, n);
            if (minus) {
                res(k - 1, n - 1) = weight * kI * (-kI * t.gamma / delta);
                R.add_pole(res, cplx(0.0, t.rate / delta));
            } else {
                res(k - 1, n - 1) = weight * kI * (kI * t.gamma / delta);
                R.add_pole(res, cplx(0.0, -t.rate / delta));
            }
        }
    };
    for (int k = 1; k <= n - 1; ++k) {
        add(k, sys.c_first(n + k), 1.0, xi(n + k) - xi(1), true);
        add(k, sys.c_last(n + k), 1.0, xi(2 * n) - xi(n + k), false);
        for (int j = 2; j <= n; ++j) {
            add(k, sys.c_first(j), -bnd.h(k, j), xi(j) - xi(1), true);
            add(k, sys.c_last(j), -bnd.h(k, j), xi(2 * n) - xi(j), false);
        }
    }
    return R;
}

std::vector<SplitResult> e1_transform_parts(const E1System& sys, const E1Boundary& bnd, const LambdaGrid& grid) {
    check_n(sys, bnd);
    const int n = sys.n();
    std::vector<SplitResult> out;
    for (int k = 1; k <= n - 1; ++k) {
        SplitResult r{LineMatrixFunction(grid, 1, {HalfPlane::Plus, 0.0}),
                      LineMatrixFunction(grid, 1, {HalfPlane::Minus, 0.0})};
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto [m, p] = parts_at(sys, bnd, k, grid[i]);
            r.plus[i](0, 0) = p;
            r.minus[i](0, 0) = m;
        }
        out.push_back(std::move(r));
    }
    return out;
}

E1Profiles e1_true_profiles(const E1System& sys, const E1Boundary& bnd, const std::vector<double>& s) {
    check_n(sys, bnd);
    const int n = sys.n();
    const auto& x = sys.disp();
    auto xi = [&](int one_based) { return x[std::size_t(one_based - 1)]; };
    E1Profiles p;
    p.s = s;
    p.c_minus.assign(std::size_t(n - 1), std::vector<cplx>(s.size()));
    p.c_plus.assign(std::size_t(n - 1), std::vector<cplx>(s.size()));
    auto scaled = [](const ScalarProfile& c, double d, double si) { return c(si / d) / d; };
    for (int k = 1; k <= n - 1; ++k)
        for (std::size_t i = 0; i < s.size(); ++i) {
            cplx m = scaled(sys.c_first(n + k), xi(n + k) - xi(1), s[i]);
            cplx pl = scaled(sys.c_last(n + k), xi(2 * n) - xi(n + k), s[i]);
            for (int j = 2; j <= n; ++j) {
                m -= bnd.h(k, j) * scaled(sys.c_first(j), xi(j) - xi(1), s[i]);
                pl -= bnd.h(k, j) * scaled(sys.c_last(j), xi(2 * n) - xi(j), s[i]);
            }
            p.c_minus[std::size_t(k - 1)][i] = kI * m;
            p.c_plus[std::size_t(k - 1)][i] = kI * pl;
        }
    return p;
}

E1Solution e1_explicit_solution(const E1System& sys, double lambda, const Vec& a, const Vec& b,
                                const std::vector<double>& x) {
    const int n = sys.n();
    if (a.size() != n || b.size() != n) throw InvalidArgument("amplitude vectors must have length n");
    const auto& d = sys.disp();
    auto xi = [&](int one_based) { return d[std::size_t(one_based - 1)]; };
    E1Solution sol{x, std::vector<Vec>(x.size(), Vec::Zero(2 * n))};
    const cplx a1 = a(0), b2n = b(n - 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xv = x[i];
        Vec& z = sol.z[i];
        z(0) = a1 * std::exp(kI * lambda * xi(1) * xv);
        z(2 * n - 1) = b2n * std::exp(kI * lambda * xi(2 * n) * xv);
        for (int k = 2; k <= 2 * n - 1; ++k) {
            const cplx amp = k <= n ? a(k - 1) : b(k - n - 1);
            const cplx t1 = sys.c_first(k).tail_transform(xv, lambda * (xi(1) - xi(k)));
            const cplx t2 = sys.c_last(k).tail_transform(xv, lambda * (xi(2 * n) - xi(k)));
            z(k - 1) = (amp - kI * a1 * t1 - kI * b2n * t2) * std::exp(kI * lambda * xi(k) * xv);
        }
    }
    return sol;
}

std::vector<SplitResult> e1_split(const LineMatrixFunction& S, double edge_tol) {
    const int n = S.m();
    std::vector<SplitResult> out;
    for (int k = 1; k <= n - 1; ++k) {
        LineMatrixFunction f(S.grid(), 1);
        const auto v = S.entry(k - 1, n - 1);
        f.set_entry(0, 0, v);
        out.push_back(plemelj_split(f, edge_tol));
    }
    return out;
}

E1Profiles e1_invert_transforms(const std::vector<SplitResult>& splits, double ds, double s_max) {
    if (!(ds > 0.0) || !(s_max > 0.0)) throw ValidationError("s grid needs positive step and extent");
    E1Profiles p;
    const std::size_t ns = std::size_t(std::ceil(s_max / ds - 1e-9)) + 1;
    p.s.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) p.s[i] = double(i) * ds;
    for (const auto& sp : splits) {
        const RationalExpansion plus(sp.plus.grid(), sp.plus.entry(0, 0));
        const RationalExpansion minus(sp.minus.grid(), sp.minus.entry(0, 0));
        p.c_plus.push_back(plus.plus_profile(p.s));
        p.c_minus.push_back(minus.minus_profile(p.s));
    }
    return p;
}

double e1_profile_bound(const E1Profiles& p, double rate) {
    double M = 0.0;
    for (const auto* fam : {&p.c_minus, &p.c_plus})
        for (const auto& v : *fam)
            for (std::size_t i = 0; i < v.size(); ++i) M = std::max(M, std::abs(v[i]) * std::exp(rate * p.s[i]));
    return M;
}

E1Recovery e1_solve_coefficients(const std::vector<E1Profiles>& profiles, const std::vector<E1Boundary>& bnds,
                                 const Dispersion& disp, double singular_cutoff) {
    if (profiles.empty() || profiles.size() != bnds.size())
        throw InvalidArgument("need one profile set per boundary matrix");
    const int n = disp.n();
    const std::size_t ns = profiles.front().s.size();
    for (const auto& p : profiles)
        if (p.s != profiles.front().s || p.c_minus.size() != std::size_t(n - 1) || p.c_plus.size() != std::size_t(n - 1))
            throw GridMismatch("profile sets must share one s grid and have n - 1 entries");
    for (const auto& b : bnds)
        if (b.n() != n) throw InvalidArgument("boundary and dispersion disagree on n");

    const int unknowns = 2 * (n - 1);
    const int eqs = int(bnds.size()) * (n - 1);
    // rows: boundary beta, index k; columns: u_2..u_n then u_{n+1}..u_{2n-1}
    Mat M = Mat::Zero(eqs, unknowns);
    for (std::size_t beta = 0; beta < bnds.size(); ++beta)
        for (int k = 1; k <= n - 1; ++k) {
            const int row = int(beta) * (n - 1) + (k - 1);
            for (int j = 2; j <= n; ++j) M(row, j - 2) = -bnds[beta].h(k, j);
            M(row, n - 1 + k - 1) = 1.0;
        }

    E1Recovery rec;
    rec.unknowns = unknowns;
    rec.min_singular_minus = rec.min_singular_plus = std::numeric_limits<double>::infinity();
    std::vector<std::vector<cplx>> u_minus(static_cast<std::size_t>(unknowns), std::vector<cplx>(ns));
    std::vector<std::vector<cplx>> u_plus = u_minus;
    std::size_t deficient = 0;
    int worst_deficiency = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        Vec rhs_m(eqs), rhs_p(eqs);
        for (std::size_t beta = 0; beta < bnds.size(); ++beta)
            for (int k = 1; k <= n - 1; ++k) {
                const int row = int(beta) * (n - 1) + (k - 1);
                rhs_m(row) = -kI * profiles[beta].c_minus[std::size_t(k - 1)][i];
                rhs_p(row) = -kI * profiles[beta].c_plus[std::size_t(k - 1)][i];
            }
        // the matrix is the same for both families and every s; the rank is
        // still decided per point, as the diagnostics report it per point
        Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(singular_cutoff);
        const auto& sv = svd.singularValues();
        Eigen::VectorXd full = Eigen::VectorXd::Zero(unknowns);
        full.head(sv.size()) = sv;
        const double smin = full.minCoeff();
        rec.min_singular_minus = std::min(rec.min_singular_minus, smin);
        rec.min_singular_plus = std::min(rec.min_singular_plus, smin);
        const int rank = int(svd.rank());
        rec.rank = rank;
        if (rank < unknowns) {
            ++deficient;
            worst_deficiency = std::max(worst_deficiency, unknowns - rank);
            continue;
        }
        const Vec xm = svd.solve(rhs_m), xp = svd.solve(rhs_p);
        for (int q = 0; q < unknowns; ++q) {
            u_minus[std::size_t(q)][i] = xm(q);
            u_plus[std::size_t(q)][i] = xp(q);
        }
    }
    if (deficient > 0) throw RankDeficient(std::size_t(worst_deficiency), deficient, ns);

    // back to native arguments: c(x) = D u(D x)
    const double ds = profiles.front().ds();
    const double s_max = profiles.front().s.back();
    auto resample = [&](const std::vector<cplx>& u, double D) {
        const std::size_t nx = std::size_t(std::floor(s_max / (D * ds) + 1e-9)) + 1;
        std::vector<cplx> v(nx);
        bool any = false;
        for (std::size_t i = 0; i < nx; ++i) {
            v[i] = D * cubic_interpolate(u, std::min(D * double(i), double(u.size() - 1)));
            any = any || v[i] != cplx(0.0);
        }
        // |c(s)| <= M e^{-eps s / (xi_2n - xi_1)} becomes rate D / (xi_2n - xi_1) in x, eps = 1 scale
        const double rate = D / (disp.last() - disp.first());
        return any ? ScalarProfile::sampled(ds, std::move(v), rate) : ScalarProfile{};
    };
    auto xi = [&](int one_based) { return disp[std::size_t(one_based - 1)]; };
    rec.c_first.assign(std::size_t(2 * n - 2), ScalarProfile{});
    rec.c_last.assign(std::size_t(2 * n - 2), ScalarProfile{});
    for (int q = 0; q < unknowns; ++q) {
        const int comp = q < n - 1 ? q + 2 : n + 1 + (q - (n - 1));  // 1-based component index
        rec.c_first[std::size_t(comp - 2)] = resample(u_minus[std::size_t(q)], xi(comp) - xi(1));
        rec.c_last[std::size_t(comp - 2)] = resample(u_plus[std::size_t(q)], xi(2 * n) - xi(comp));
    }
    return rec;
}

E1RoundtripReport e1_roundtrip(const E1System& sys, const E1Boundary& bnd, const E1Boundary& bnd_tilde,
                               const LambdaGrid& grid, const E1RoundtripOptions& opts) {
    check_n(sys, bnd);
    check_n(sys, bnd_tilde);
    const int n = sys.n();
    const auto& disp = sys.disp();
    const double spread = disp.last() - disp.first();
    double s_max = opts.s_max;
    if (s_max <= 0.0) {
        const double x_max = truncation_length(sys.embed().envelope(), opts.tail_tol);
        s_max = spread * std::max(x_max, opts.x_check);
    }

    E1RoundtripReport rep;
    const auto S1 = e1_scattering(sys, bnd, grid);
    const auto S2 = e1_scattering(sys, bnd_tilde, grid);
    if (sys.is_exp_sum()) {
        const auto R1 = e1_scattering_rational(sys, bnd).sample(grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            rep.scattering_error =
                std::max(rep.scattering_error, (S1[i] - Mat::Identity(n, n) - R1[i]).cwiseAbs().maxCoeff());
    }
    const auto p1 = e1_invert_transforms(e1_split(S1, opts.edge_tol), opts.ds, s_max);
    const auto p2 = e1_invert_transforms(e1_split(S2, opts.edge_tol), opts.ds, s_max);
    rep.recovery = e1_solve_coefficients({p1, p2}, {bnd, bnd_tilde}, disp);
    rep.min_singular_minus = rep.recovery.min_singular_minus;
    rep.min_singular_plus = rep.recovery.min_singular_plus;

    // errors relative to each profile's sup on [0, x_check]; zero profiles use the largest sup
    const std::size_t nc = std::size_t(std::floor(opts.x_check / opts.ds + 1e-9)) + 1;
    auto sup = [&](const ScalarProfile& p) {
        double m = 0.0;
        for (std::size_t i = 0; i < nc; ++i) m = std::max(m, std::abs(p(double(i) * opts.ds)));
        return m;
    };
    double global = 0.0;
    for (const auto* fam : {&sys.c_first_all(), &sys.c_last_all()})
        for (const auto& p : *fam) global = std::max(global, sup(p));
    auto rel = [&](const ScalarProfile& truth, const ScalarProfile& got) {
        double e = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            const double x = double(i) * opts.ds;
            e = std::max(e, std::abs(truth(x) - got(x)));
        }
        const double s = sup(truth);
        const double norm = s > 0.0 ? s : (global > 0.0 ? global : 1.0);
        return e / norm;
    };
    for (int k = 2; k <= 2 * n - 1; ++k) {
        rep.err_first.push_back(rel(sys.c_first(k), rep.recovery.c_first[std::size_t(k - 2)]));
        rep.err_last.push_back(rel(sys.c_last(k), rep.recovery.c_last[std::size_t(k - 2)]));
    }
    for (double e : rep.err_first) rep.max_rel_error = std::max(rep.max_rel_error, e);
    for (double e : rep.err_last) rep.max_rel_error = std::max(rep.max_rel_error, e);
    return rep;
}

}  // namespace isp
