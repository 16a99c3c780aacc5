#include "isp/rh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "isp/cayley.hpp"
#include "isp/errors.hpp"

namespace isp {

void RationalMatrix::add_pole(Mat residue, cplx pole) {
    if (residue.rows() != m_ || residue.cols() != m_) throw InvalidArgument("residue has the wrong shape");
    if (pole.imag() == 0.0) throw InvalidArgument("rational function has a pole on the real axis");
    residues_.push_back(std::move(residue));
    poles_.push_back(pole);
}

Mat RationalMatrix::operator()(cplx lambda) const {
    Mat v = Mat::Zero(m_, m_);
    for (std::size_t p = 0; p < poles_.size(); ++p) v += residues_[p] / (lambda - poles_[p]);
    return v;
}

LineMatrixFunction RationalMatrix::sample(const LambdaGrid& grid, Analyticity tag) const {
    return LineMatrixFunction::from_function(grid, m_, [this](double l) { return (*this)(l); }, tag);
}

RationalMatrix RationalMatrix::plus_part() const {
    RationalMatrix out(m_);
    for (std::size_t p = 0; p < poles_.size(); ++p)
        if (poles_[p].imag() < 0.0) out.add_pole(residues_[p], poles_[p]);
    return out;
}

RationalMatrix RationalMatrix::minus_part() const {
    RationalMatrix out(m_);
    for (std::size_t p = 0; p < poles_.size(); ++p)
        if (poles_[p].imag() > 0.0) out.add_pole(residues_[p], poles_[p]);
    return out;
}

Mat RationalMatrix::profile(double t, bool plus) const {
    Mat v = Mat::Zero(m_, m_);
    for (std::size_t p = 0; p < poles_.size(); ++p) {
        const cplx z = poles_[p];
        if (plus && z.imag() < 0.0) v += -kI * residues_[p] * std::exp(-kI * z * t);
        if (!plus && z.imag() > 0.0) v += kI * residues_[p] * std::exp(kI * z * t);
    }
    return v;
}

std::pair<RationalMatrix, RationalMatrix> plemelj_split(const RationalMatrix& f) {
    return {f.plus_part(), f.minus_part()};
}

namespace {

double edge_size(const LineMatrixFunction& f) {
    if (f.size() == 0) return 0.0;
    return std::max(f[0].cwiseAbs().maxCoeff(), f[f.size() - 1].cwiseAbs().maxCoeff());
}

}  // namespace

SplitResult plemelj_split(const LineMatrixFunction& f, double edge_tol) {
    if (f.grid().kind() != GridKind::Cayley) throw GridMismatch("numeric split needs a Cayley grid");
    const double edge = edge_size(f);
    if (edge > edge_tol)
        throw EdgeDecayViolation("function does not decay at the grid ends",
                                 {{"edge_value", edge}, {"edge_tol", edge_tol}, {"lambda_max", f.grid().lambda_max()}});
    return {project_plus(f), project_minus(f)};
}

double wrong_side_content(const LineMatrixFunction& f, HalfPlane side) {
    if (f.grid().kind() != GridKind::Cayley) throw GridMismatch("frequency content needs a Cayley grid");
    double plus = 0.0, minus = 0.0;
    for (int r = 0; r < f.m(); ++r)
        for (int c = 0; c < f.m(); ++c) {
            const auto v = f.entry(r, c);
            const RationalExpansion ex(f.grid(), v);
            plus += ex.plus_energy();
            minus += ex.minus_energy();
        }
    const double total = plus + minus;
    if (total == 0.0) return 0.0;
    return std::sqrt((side == HalfPlane::Plus ? minus : plus) / total);
}

// ---------------------------------------------------------------------------

namespace {

// Operator X -> X + P+[X g] on stacked entry samples [(r m + c) N + j].
class RHOperator {
public:
    RHOperator(const LineMatrixFunction& g) : g_(g), m_(g.m()), n_(g.size()), proj_(g.grid()) {}

    std::size_t size() const { return n_ * std::size_t(m_ * m_); }

    void product(const Vec& x, Vec& out) const {
        out.resize(Eigen::Index(size()));
        for (std::size_t j = 0; j < n_; ++j)
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < m_; ++c) {
                    cplx acc = 0.0;
                    for (int p = 0; p < m_; ++p) acc += x(at(r, p, j)) * g_[j](p, c);
                    out(at(r, c, j)) = acc;
                }
    }

    void project(Vec& v, bool plus) {
        for (int e = 0; e < m_ * m_; ++e) proj_.project({v.data() + std::size_t(e) * n_, n_}, plus);
    }

    void apply(const Vec& x, Vec& y) {
        product(x, y);
        project(y, true);
        y += x;
    }

    Eigen::Index at(int r, int c, std::size_t j) const {
        return Eigen::Index((std::size_t(r * m_ + c)) * n_ + j);
    }

private:
    const LineMatrixFunction& g_;
    int m_;
    std::size_t n_;
    CayleyProjector proj_;
};

struct GmresOutcome {
    Vec x;
    int iterations = 0;
    double relres = 0.0;
    bool converged = false;
};

GmresOutcome gmres(RHOperator& op, const Vec& b, double tol, int restart, int max_iter) {
    const Eigen::Index n = b.size();
    GmresOutcome out;
    out.x = Vec::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    Vec r = b, w(n);
    double beta = r.norm();
    while (out.iterations < max_iter) {
        std::vector<Vec> V;
        V.push_back(r / beta);
        Mat H = Mat::Zero(restart + 1, restart);
        std::vector<cplx> cs(restart), sn(restart);
        Vec gv = Vec::Zero(restart + 1);
        gv(0) = beta;
        int k = 0;
        for (; k < restart && out.iterations < max_iter; ++k, ++out.iterations) {
            op.apply(V[std::size_t(k)], w);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    const cplx hik = V[std::size_t(i)].dot(w);
                    H(i, k) += hik;
                    w -= hik * V[std::size_t(i)];
                }
            H(k + 1, k) = w.norm();
            for (int i = 0; i < k; ++i) {
                const cplx t = std::conj(cs[i]) * H(i, k) + std::conj(sn[i]) * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double a = std::abs(H(k, k)), bb = std::abs(H(k + 1, k));
            const double den = std::hypot(a, bb);
            if (den == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = H(k, k) / den;
                sn[k] = H(k + 1, k) / den;
            }
            H(k, k) = den;
            H(k + 1, k) = 0.0;
            gv(k + 1) = -sn[k] * gv(k);
            gv(k) = std::conj(cs[k]) * gv(k);
            const double res = std::abs(gv(k + 1));
            if (bb > 0.0) V.push_back(w / bb);
            if (res <= tol * bnorm || bb == 0.0) {
                ++k;
                ++out.iterations;
                break;
            }
        }
        // back-substitution on the k x k triangle
        Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(gv.head(k));
        for (int i = 0; i < k; ++i) out.x += y(i) * V[std::size_t(i)];
        op.apply(out.x, w);
        r = b - w;
        beta = r.norm();
        out.relres = beta / bnorm;
        if (out.relres <= tol * 10.0) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

// Smallest singular value of the Arnoldi matrix from a fixed random start,
// relative to the largest.
double arnoldi_probe(RHOperator& op, int steps) {
    const Eigen::Index n = Eigen::Index(op.size());
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
    op.project(v, true);
    std::vector<Vec> V{v / v.norm()};
    Mat H = Mat::Zero(steps + 1, steps);
    Vec w(n);
    int k = 0;
    bool invariant = false;
    for (; k < steps; ++k) {
        op.apply(V.back(), w);
        const double wnorm = w.norm();
        // two Gram-Schmidt passes; one loses orthogonality near breakdown
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= k; ++i) {
                const cplx hik = V[std::size_t(i)].dot(w);
                H(i, k) += hik;
                w -= hik * V[std::size_t(i)];
            }
        H(k + 1, k) = w.norm();
        if (std::abs(H(k + 1, k)) <= 1e-12 * wnorm) {
            // Krylov space is invariant: the square Hessenberg block carries the spectrum
            ++k;
            invariant = true;
            break;
        }
        V.push_back(w / std::abs(H(k + 1, k)));
    }
    const Mat Hk = invariant ? Mat(H.topLeftCorner(k, k)) : Mat(H.topLeftCorner(k + 1, k));
    const Eigen::JacobiSVD<Mat> svd(Hk);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) / s(0);
}

// Net number of turns of det S along the grid (S -> I at both ends).
double winding_number(const LineMatrixFunction& S) {
    double total = 0.0;
    cplx prev = S[0].determinant();
    for (std::size_t i = 1; i < S.size(); ++i) {
        const cplx cur = S[i].determinant();
        total += std::arg(cur / prev);
        prev = cur;
    }
    return total / (2.0 * kPi);
}

}  // namespace

RHResult solve_regular_rh(const LineMatrixFunction& S, const RHOptions& opts) {
    if (S.grid().kind() != GridKind::Cayley) throw GridMismatch("Riemann-Hilbert solve needs a Cayley grid");
    const int m = S.m();
    const std::size_t N = S.size();
    const Mat I = Mat::Identity(m, m);

    for (std::size_t j = 0; j < N; ++j) {
        const double d = std::abs(S[j].determinant());
        if (!(d > opts.singular_tol))
            throw SingularScattering("det S vanishes on the grid", {{"lambda", S.grid()[j]}, {"abs_det", d}});
    }
    LineMatrixFunction g = S;
    for (std::size_t j = 0; j < N; ++j) g[j] -= I;
    const double edge = edge_size(g);
    if (edge > opts.edge_tol)
        throw EdgeDecayViolation("S - I does not decay at the grid ends", {{"edge_value", edge}, {"edge_tol", opts.edge_tol}});
    const double wind = winding_number(S);
    if (std::abs(wind) > 0.5)
        throw FredholmSingular("det S winds around the origin, the factorization is not canonical",
                               {{"winding_number", std::round(wind)}});

    RHOperator op(g);
    Vec b(Eigen::Index(op.size()));
    for (std::size_t j = 0; j < N; ++j)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) b(op.at(r, c, j)) = -g[j](r, c);
    op.project(b, true);

    RHResult res{LineMatrixFunction(S.grid(), m, {HalfPlane::Plus, 0.0}),
                 LineMatrixFunction(S.grid(), m, {HalfPlane::Minus, 0.0})};
    res.probe_sigma_min = arnoldi_probe(op, opts.probe_steps);
    if (res.probe_sigma_min < opts.probe_tol)
        throw FredholmSingular("discrete Riemann-Hilbert operator is numerically singular",
                               {{"sigma_min", res.probe_sigma_min}});

    auto sol = gmres(op, b, opts.gmres_tol, opts.restart, opts.max_iter);
    res.iterations = sol.iterations;
    res.gmres_residual = sol.relres;
    if (!sol.converged)
        throw FredholmSingular("GMRES did not converge on the Riemann-Hilbert equation",
                               {{"relative_residual", sol.relres}, {"iterations", double(sol.iterations)}});

    for (std::size_t j = 0; j < N; ++j)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) res.AH_plus[j](r, c) = sol.x(op.at(r, c, j));
    // (I + A+) S - I, split into the minus part and the residual plus part
    Vec full(Eigen::Index(op.size()));
    for (std::size_t j = 0; j < N; ++j) {
        const Mat v = (I + res.AH_plus[j]) * S[j] - I;
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) full(op.at(r, c, j)) = v(r, c);
    }
    Vec minus = full;
    op.project(minus, false);
    for (std::size_t j = 0; j < N; ++j)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) res.AH_minus[j](r, c) = minus(op.at(r, c, j));
    res.factorization_residual = (full - minus).cwiseAbs().maxCoeff();
    return res;
}

// ---------------------------------------------------------------------------

RecoveryResult recover_blocks(const LineMatrixFunction& AH1_plus, const LineMatrixFunction& AH1_minus,
                              const LineMatrixFunction& AH2_plus, const LineMatrixFunction& AH2_minus,
                              const BoundaryMatrix& H1, const BoundaryMatrix& H2, const RecoveryOptions& opts) {
    require_same_grid({&AH1_plus, &AH1_minus, &AH2_plus, &AH2_minus});
    const int n = AH1_plus.m();
    if (H1.n() != n || H2.n() != n) throw InvalidArgument("boundary matrix size differs from block size");
    const Mat diff = H1.matrix() - H2.matrix();
    const double det = std::abs(diff.determinant());
    if (!(det > opts.singular_tol))
        throw DegenerateBoundaryPair("det(H1 - H2) vanishes", {{"abs_det", det}});
    const Mat dinv = diff.inverse();
    const Mat& h1 = H1.matrix();
    const Mat& h2 = H2.matrix();
    const auto& grid = AH1_plus.grid();
    const Analyticity plus{HalfPlane::Plus, 0.0}, minus{HalfPlane::Minus, 0.0};
    RecoveryResult out{{LineMatrixFunction(grid, n, minus), LineMatrixFunction(grid, n, minus),
                        LineMatrixFunction(grid, n, plus), LineMatrixFunction(grid, n, plus)}};
    double scale = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Mat a12 = dinv * (AH2_plus[i] - AH1_plus[i]);
        const Mat a11 = dinv * (AH1_minus[i] * h1 - AH2_minus[i] * h2);
        const Mat a22_1 = AH1_plus[i] + h1 * a12, a22_2 = AH2_plus[i] + h2 * a12;
        const Mat a21_1 = h1 * a11 - AH1_minus[i] * h1, a21_2 = h2 * a11 - AH2_minus[i] * h2;
        // NaN must survive the running max
        const double d22 = (a22_1 - a22_2).cwiseAbs().maxCoeff(), d21 = (a21_1 - a21_2).cwiseAbs().maxCoeff();
        if (std::isnan(d22) || d22 > out.a22_disagreement) out.a22_disagreement = d22;
        if (std::isnan(d21) || d21 > out.a21_disagreement) out.a21_disagreement = d21;
        scale = std::max({scale, a22_1.cwiseAbs().maxCoeff(), a21_1.cwiseAbs().maxCoeff()});
        out.blocks.A11_minus[i] = a11;
        out.blocks.A21_minus[i] = a21_1;
        out.blocks.A12_plus[i] = a12;
        out.blocks.A22_plus[i] = a22_1;
    }
    const double worst = std::max(out.a22_disagreement, out.a21_disagreement);
    if (!(worst <= opts.consistency_tol * scale))
        throw InconsistentInputs("the two boundary matrices give different blocks",
                                 {{"a22_disagreement", out.a22_disagreement}, {"a21_disagreement", out.a21_disagreement}});
    return out;
}

SolvabilityReport solvability_report(const LineMatrixFunction& S, double singular_tol) {
    SolvabilityReport rep;
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    const int m = S.m();
    const Mat I = Mat::Identity(m, m);
    bool re_pos = true, re_neg = true, im_pos = true, im_neg = true;
    for (std::size_t i = 0; i < S.size(); ++i) {
        const double d = std::abs(S[i].determinant());
        if (d < rep.min_abs_det) {
            rep.min_abs_det = d;
            rep.argmin_lambda = S.grid()[i];
        }
        const Mat re = 0.5 * (S[i] + S[i].adjoint());
        const Mat im = (S[i] - S[i].adjoint()) / (2.0 * kI);
        const Eigen::SelfAdjointEigenSolver<Mat> es_re(re, Eigen::EigenvaluesOnly);
        const Eigen::SelfAdjointEigenSolver<Mat> es_im(im, Eigen::EigenvaluesOnly);
        const auto& er = es_re.eigenvalues();
        const auto& ei = es_im.eigenvalues();
        re_pos = re_pos && er.minCoeff() > 0.0;
        re_neg = re_neg && er.maxCoeff() < 0.0;
        im_pos = im_pos && ei.minCoeff() > 0.0;
        im_neg = im_neg && ei.maxCoeff() < 0.0;
    }
    rep.nonsingular = rep.min_abs_det > singular_tol;
    rep.real_part_definite = re_pos || re_neg;
    rep.imag_part_definite = im_pos || im_neg;
    if (S.size() > 0)
        rep.edge_residual = std::max((S[0] - I).cwiseAbs().maxCoeff(), (S[S.size() - 1] - I).cwiseAbs().maxCoeff());
    return rep;
}

}  // namespace isp
