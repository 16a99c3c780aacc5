#include <algorithm>
#include <cmath>
#include <limits>

#include "isp/errors.hpp"
#include "isp/forward.hpp"
#include "isp/quadrature.hpp"

namespace isp {

TOKernels::TOKernels(int n, double step, double x_max, double theta, double eps, int snapshot_stride)
    : n_(n), h_(step), x_max_(x_max), theta_(theta), eps_(eps), stride_(std::max(1, snapshot_stride)) {
    n_x_ = static_cast<std::size_t>(std::ceil(x_max / step - 1e-9)) + 1;
    n_tau_ = static_cast<std::size_t>(std::ceil(x_max / (theta * step) - 1e-9)) + 1;
    snap_rows_ = (n_x_ - 1) / std::size_t(stride_) + 1;
    snap_cols_ = (n_tau_ - 1) / std::size_t(stride_) + 1;
    const std::size_t e = std::size_t(dim()) * std::size_t(dim());
    origin_.assign(e * n_tau_, 0.0);
    trace_.assign(n_x_, Mat::Zero(dim(), dim()));
    snap_.assign(snap_rows_ * snap_cols_ * e, 0.0);
}

std::span<const cplx> TOKernels::origin_row(int r, int c) const {
    return {origin_.data() + (std::size_t(r) * std::size_t(dim()) + std::size_t(c)) * n_tau_, n_tau_};
}

Mat TOKernels::origin(double t) const {
    Mat k = Mat::Zero(dim(), dim());
    const double u = t / h_;
    if (u < 0.0 || u > double(n_tau_ - 1)) return k;
    for (int r = 0; r < dim(); ++r)
        for (int c = 0; c < dim(); ++c) k(r, c) = cubic_interpolate(origin_row(r, c), u);
    return k;
}

Mat TOKernels::trace(double x) const {
    Mat k = Mat::Zero(dim(), dim());
    const double u = x / h_;
    if (u < 0.0 || u > double(n_x_ - 1)) return k;
    std::vector<cplx> col(n_x_);
    for (int r = 0; r < dim(); ++r)
        for (int c = 0; c < dim(); ++c) {
            for (std::size_t i = 0; i < n_x_; ++i) col[i] = trace_[i](r, c);
            k(r, c) = cubic_interpolate(col, u);
        }
    return k;
}

cplx TOKernels::snapshot(std::size_t row, std::size_t col, int r, int c) const {
    const std::size_t d = std::size_t(dim());
    return snap_[((row * snap_cols_ + col) * d + std::size_t(r)) * d + std::size_t(c)];
}

double TOKernels::fitted_c_tilde() const {
    double best = 0.0;
    const double sh = h_ * double(stride_);
    for (std::size_t i = 0; i < snap_rows_; ++i)
        for (std::size_t m = 0; m < snap_cols_; ++m) {
            const double x = double(i) * sh, tau = double(m) * sh;
            const double arg = x + theta_ * tau;
            // the outer fifth of the triangle only holds truncation noise
            if (arg > 0.8 * x_max_) continue;
            double norm2 = 0.0;
            for (int r = 0; r < dim(); ++r)
                for (int c = 0; c < dim(); ++c) norm2 += std::norm(snapshot(i, m, r, c));
            best = std::max(best, std::sqrt(norm2) * std::exp(eps_ * arg));
        }
    return best;
}

// ---------------------------------------------------------------------------

namespace {

// Lagrange weights on nodes 0..3 at position t.
std::array<double, 4> lagrange4(double t) {
    return {-(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0, t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0, t * (t - 1.0) * (t - 2.0) / 6.0};
}

struct EntryGeom {
    double rho;    // row speed / column speed
    double alpha;  // xi_c / (xi_c - xi_r), used when rho < 1
    bool hits_diagonal;
    const ScalarProfile* q;  // Q entry driving the boundary value
};

// Characteristic march state. Row arrays hold, for each tau node m, a
// dim x dim block in row-major order.
class March {
public:
    March(const MCanonicalPotential& pot, const Dispersion& disp, const KernelOptions& opts, TOKernels& out)
        : pot_(pot), opts_(opts), out_(out), d_(out.dim()), e_(std::size_t(d_) * std::size_t(d_)),
          h_(out.step()), n_tau_(out.n_tau()) {
        geom_.resize(e_);
        for (int r = 0; r < d_; ++r)
            for (int c = 0; c < d_; ++c) {
                auto& g = geom_[idx(r, c)];
                g.rho = disp[std::size_t(r)] / disp[std::size_t(c)];
                g.hits_diagonal = g.rho < 1.0;
                g.alpha = g.hits_diagonal ? disp[std::size_t(c)] / (disp[std::size_t(c)] - disp[std::size_t(r)]) : 0.0;
                g.q = &pot.full_entry(r, c);
            }
        m_crit_ = 0;
        for (const auto& g : geom_)
            if (g.hits_diagonal) m_crit_ = std::max<std::size_t>(m_crit_, std::size_t(std::ceil(1.0 - g.rho)));
        const int n = out.n();
        allowed_.assign(e_, true);
        if (opts.exec == Exec::Parallel)
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) {
                    const bool lo = r >= n, ri = c >= n;
                    const Block b = lo ? (ri ? Block::B22 : Block::B21) : (ri ? Block::B12 : Block::B11);
                    allowed_[idx(r, c)] = kernel_entry_allowed(b, n, r - (lo ? n : 0), c - (ri ? n : 0));
                }
        for (std::size_t e = 0; e < e_; ++e)
            if (allowed_[e]) allowed_list_.push_back(e);
        rows_of_col_.resize(std::size_t(d_));
        for (int c = 0; c < d_; ++c)
            for (int r = 0; r < d_; ++r)
                if (allowed_[idx(r, c)]) rows_of_col_[std::size_t(c)].push_back(r);
        // past m_fast_ every stencil sits at a fixed offset from m with fixed weights
        m_fast_ = 1;
        for (int r = 0; r < d_; ++r)
            for (int c = 0; c < d_; ++c) {
                const std::size_t e = idx(r, c);
                if (!allowed_[e]) continue;
                const double shift = geom_[e].rho - 1.0;
                const double fl = std::floor(shift);
                fast_.push_back({e, std::ptrdiff_t(fl) - 1, lagrange4(shift - fl + 1.0)});
                m_fast_ = std::max<std::size_t>(m_fast_, std::size_t(std::max(0.0, std::ceil(1.0 - shift))));
            }
        curA_.assign(n_tau_ * e_, 0.0);
        prevP_.assign(n_tau_ * e_, 0.0);
        curP_.assign(n_tau_ * e_, 0.0);
        prevG0_.assign(e_, 0.0);
        curG0_.assign(e_, 0.0);
    }

    void run() {
        const std::size_t nx = out_.n_x();
        const double theta = out_.theta();
        std::size_t prev_active = 0;
        for (std::size_t i = nx; i-- > 0;) {
            const double x = double(i) * h_;
            const std::size_t active = std::min(
                n_tau_, static_cast<std::size_t>(std::floor((out_.x_max() - x) / (theta * h_) + 1e-9)) + 1);
            Q_ = pot_.matrix(x);
            prepare_row();
            // no clearing: nodes past `active` are never read, and every admissible entry below it is written

            solve_node(x, 0, prev_active);
            const std::size_t special = std::min(active, std::max<std::size_t>(m_crit_, 1));
            for (std::size_t m = 1; m < special; ++m) solve_node(x, m, prev_active);
            if (opts_.exec == Exec::Parallel) {
                const std::size_t fast = std::min(active, std::max(special, m_fast_));
                for (std::size_t m = special; m < fast; ++m) solve_node(x, m, prev_active);
#pragma omp parallel for schedule(static)
                for (std::size_t m = fast; m < active; ++m) solve_fast_node(m, prev_active);
            } else {
                for (std::size_t m = special; m < active; ++m) solve_node(x, m, prev_active);
            }
            record(i, active);
            std::swap(prevP_, curP_);
            std::swap(prevG0_, curG0_);
            prev_active = active;
        }
    }

private:
    std::size_t idx(int r, int c) const { return std::size_t(r) * std::size_t(d_) + std::size_t(c); }

    // value of a previous-row entry at fractional node u >= 0, zero past the active range
    cplx interp(const std::vector<cplx>& row, std::size_t e, double u, std::size_t active) const {
        std::size_t base;
        double t;
        if (u < 1.0) {
            base = 0;
            t = u;
        } else {
            base = static_cast<std::size_t>(std::floor(u)) - 1;
            t = u - double(base);
        }
        const auto w = lagrange4(t);
        cplx acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t m = base + k;
            if (m < active) acc += w[k] * row[m * e_ + e];
        }
        return acc;
    }

    // Per-row tables: LU factors of the regular column systems (parallel path)
    // and flattened term lists for the regular solve and for G = Q K.
    void prepare_row() {
        const cplx half = kI * (0.5 * h_);
        gterms_.clear();
        for (std::size_t e : allowed_list_) {
            const int r = int(e) / d_, c = int(e) % d_;
            for (int p : rows_of_col_[std::size_t(c)])
                if (Q_(r, p) != cplx(0.0)) gterms_.push_back({e, idx(p, c), Q_(r, p), half * Q_(r, p)});
        }
        if (opts_.exec != Exec::Parallel) return;
        lu_.clear();
        sterms_.clear();
        for (int c = 0; c < d_; ++c) {
            const auto& rows = rows_of_col_[std::size_t(c)];
            const int k = int(rows.size());
            Mat M = Mat::Identity(k, k);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) M(a, b) -= half * Q_(rows[a], rows[b]);
            lu_.emplace_back(M);
            if (k == 0) continue;
            const Mat mi = lu_.back().inverse();
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    if (mi(a, b) != cplx(0.0)) sterms_.push_back({idx(rows[a], c), idx(rows[b], c), mi(a, b), 0.0});
        }
    }

    // Node with every stencil at its fixed offset: explicit part by the
    // precomputed weights, then the inverted column systems. The P slot of
    // the node doubles as scratch for the explicit part.
    void solve_fast_node(std::size_t m, std::size_t prev_active) {
        cplx* b = curP_.data() + m * e_;
        for (const auto& f : fast_) {
            const std::ptrdiff_t base = std::ptrdiff_t(m) + f.offset;
            cplx a = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                const std::size_t mm = std::size_t(base) + k;
                if (mm >= prev_active) break;
                a += f.w[k] * prevP_[mm * e_ + f.e];
            }
            b[f.e] = a;
        }
        cplx* A = curA_.data() + m * e_;
        for (std::size_t e : allowed_list_) A[e] = 0.0;
        for (const auto& t : sterms_) A[t.out] += t.coef * b[t.in];
        store_G(m);
    }

    void store_G(std::size_t m) {
        const cplx* A = curA_.data() + m * e_;
        cplx* P = curP_.data() + m * e_;
        if (m == 0) {
            const cplx half = kI * (0.5 * h_);
            for (std::size_t e : allowed_list_) curG0_[e] = 0.0;
            for (const auto& t : gterms_) curG0_[t.out] += t.coef * A[t.in];
            for (std::size_t e : allowed_list_) P[e] = A[e] + half * curG0_[e];
            return;
        }
        for (std::size_t e : allowed_list_) P[e] = A[e];
        for (const auto& t : gterms_) P[t.out] += t.half_coef * A[t.in];
    }

    void solve_node(double x, std::size_t m, std::size_t prev_active) {
        // explicit part b and implicit coefficient D for each entry
        std::array<cplx, 64> bbuf{}, dbuf{};
        std::vector<cplx> bvec, dvec;
        cplx* b = bbuf.data();
        cplx* D = dbuf.data();
        if (e_ > bbuf.size()) {
            bvec.assign(e_, 0.0);
            dvec.assign(e_, 0.0);
            b = bvec.data();
            D = dvec.data();
        }
        bool regular = true;
        for (std::size_t e = 0; e < e_; ++e) {
            if (!allowed_[e]) continue;
            const auto& g = geom_[e];
            const double u = double(m) + g.rho - 1.0;
            if (g.hits_diagonal && u < 0.0) {
                regular = false;
                const double d = g.alpha * double(m) * h_;
                const double w = d / h_;
                const cplx gd = (1.0 - w) * curG0_[e] + w * prevG0_[e];  // G(x + d, x + d)
                const cplx qv = g.q->is_zero() ? cplx(0.0) : (*g.q)(x + d);
                b[e] = kI * g.alpha * qv + kI * (0.5 * d) * gd;
                D[e] = kI * (0.5 * d);
            } else {
                b[e] = interp(prevP_, e, u, prev_active);
                D[e] = kI * (0.5 * h_);
            }
        }
        cplx* A = curA_.data() + m * e_;
        if (opts_.exec == Exec::Serial) {
            successive_approximation(b, D, A, x, m);
        } else {
            for (int c = 0; c < d_; ++c) {
                const auto& rows = rows_of_col_[std::size_t(c)];
                const int k = int(rows.size());
                if (k == 0) continue;
                Vec rhs(k);
                for (int a = 0; a < k; ++a) rhs(a) = b[idx(rows[a], c)];
                Vec sol;
                if (regular) {
                    sol = lu_[std::size_t(c)].solve(rhs);
                } else {
                    Mat M = Mat::Identity(k, k);
                    for (int a = 0; a < k; ++a)
                        for (int bb = 0; bb < k; ++bb) M(a, bb) -= D[idx(rows[a], c)] * Q_(rows[a], rows[bb]);
                    sol = M.partialPivLu().solve(rhs);
                }
                for (int a = 0; a < k; ++a) A[idx(rows[a], c)] = sol(a);
            }
        }
        store_G(m);
    }

    void successive_approximation(const cplx* b, const cplx* D, cplx* A, double x, std::size_t m) {
        for (std::size_t e = 0; e < e_; ++e) A[e] = b[e];
        std::array<cplx, 64> nbuf{};
        std::vector<cplx> nvec;
        cplx* next = nbuf.data();
        if (e_ > nbuf.size()) {
            nvec.assign(e_, 0.0);
            next = nvec.data();
        }
        for (int it = 0; it < opts_.max_local_iter; ++it) {
            double change = 0.0, scale = 0.0;
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) {
                    cplx acc = 0.0;
                    for (int p = 0; p < d_; ++p) acc += Q_(r, p) * A[idx(p, c)];
                    next[idx(r, c)] = b[idx(r, c)] + D[idx(r, c)] * acc;
                }
            for (std::size_t e = 0; e < e_; ++e) {
                change = std::max(change, std::abs(next[e] - A[e]));
                scale = std::max(scale, std::abs(next[e]));
                A[e] = next[e];
            }
            if (change <= opts_.local_tol * std::max(scale, 1e-300) || change == 0.0) return;
        }
        throw NonConvergence("kernel node iteration did not converge", {{"x", x}, {"t_minus_x", double(m) * h_}});
    }

    void record(std::size_t i, std::size_t active) {
        const int stride = out_.snapshot_stride();
        Mat& tr = out_.trace_storage()[i];
        for (int r = 0; r < d_; ++r)
            for (int c = 0; c < d_; ++c) tr(r, c) = curA_[idx(r, c)];
        if (i == 0) {
            auto& o = out_.origin_storage();
            for (std::size_t e = 0; e < e_; ++e)
                for (std::size_t m = 0; m < active; ++m) o[e * n_tau_ + m] = curA_[m * e_ + e];
        }
        if (i % std::size_t(stride) == 0) {
            auto& s = out_.snapshot_storage();
            const std::size_t row = i / std::size_t(stride);
            for (std::size_t col = 0; col < out_.snapshot_cols(); ++col) {
                const std::size_t m = col * std::size_t(stride);
                if (m >= active) break;
                for (std::size_t e = 0; e < e_; ++e) s[(row * out_.snapshot_cols() + col) * e_ + e] = curA_[m * e_ + e];
            }
        }
    }

    const MCanonicalPotential& pot_;
    const KernelOptions& opts_;
    TOKernels& out_;
    int d_;
    std::size_t e_;
    double h_;
    std::size_t n_tau_;
    std::size_t m_crit_;
    std::vector<EntryGeom> geom_;
    std::vector<bool> allowed_;
    std::vector<std::vector<int>> rows_of_col_;
    std::vector<Eigen::PartialPivLU<Mat>> lu_;
    struct Term {
        std::size_t out, in;
        cplx coef, half_coef;
    };
    std::vector<Term> gterms_, sterms_;
    std::vector<std::size_t> allowed_list_;
    struct FastEntry {
        std::size_t e;
        std::ptrdiff_t offset;  // stencil base minus m
        std::array<double, 4> w;
    };
    std::vector<FastEntry> fast_;
    std::size_t m_fast_ = 1;
    Mat Q_;
    // A at the current row (for recording) and P = A + (i h / 2) Q A, the
    // only combination the next row interpolates; G = Q A kept on the diagonal
    std::vector<cplx> curA_, prevP_, curP_, prevG0_, curG0_;
};

}  // namespace

TOKernels solve_to_kernels(const MCanonicalPotential& pot, const Dispersion& disp, const KernelOptions& opts) {
    if (pot.n() != disp.n()) throw InvalidArgument("potential and dispersion disagree on n");
    if (!(opts.step > 0.0)) throw ValidationError("kernel step must be positive");
    const Envelope env = pot.envelope();
    const double theta = theta_exponent(disp);
    double x_max = opts.x_max > 0.0 ? opts.x_max : truncation_length(env, opts.tail_tol);
    if (opts.t_max > 0.0) x_max = std::min(x_max, theta * opts.t_max);
    x_max = std::max(x_max, 4.0 * opts.step);
    TOKernels k(pot.n(), opts.step, x_max, theta, env.eps, opts.snapshot_stride);
    if (!pot.is_zero()) {
        March march(pot, disp, opts, k);
        march.run();
    }
    k.set_c_tilde(k.fitted_c_tilde());
    return k;
}

MCanonicalPotential potential_from_kernels(const TOKernels& kernels, const Dispersion& disp) {
    if (kernels.n() != disp.n()) throw InvalidArgument("kernels and dispersion disagree on n");
    const int n = kernels.n();
    MCanonicalPotential pot(n);
    const std::size_t nx = kernels.n_x();
    for (Block b : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                if (!potential_entry_allowed(b, n, k, j)) continue;
                const int r = block_row_offset(b, n) + k, c = block_col_offset(b, n) + j;
                const double xr = disp[std::size_t(r)], xc = disp[std::size_t(c)];
                // q = -i (xi_c - xi_r) / xi_c * K(x, x)
                const cplx factor = -kI * (xc - xr) / xc;
                std::vector<cplx> v(nx);
                bool any = false;
                for (std::size_t i = 0; i < nx; ++i) {
                    v[i] = factor * kernels.trace_node(i)(r, c);
                    any = any || v[i] != cplx(0.0);
                }
                if (any) pot.set_entry(b, k, j, ScalarProfile::sampled(kernels.step(), std::move(v), kernels.eps()));
            }
    return pot;
}

double fit_decay_slope(const TOKernels& kernels, Block block, double t0, double t1, double floor) {
    const int n = kernels.n();
    const int r0 = block_row_offset(block, n), c0 = block_col_offset(block, n);
    std::vector<double> t, norm;
    for (std::size_t m = 0; m < kernels.n_tau(); ++m) {
        const double tm = double(m) * kernels.step();
        if (tm < t0 || tm > t1) continue;
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) s += std::norm(kernels.origin_row(r0 + k, c0 + j)[m]);
        t.push_back(tm);
        norm.push_back(std::sqrt(s));
    }
    const double peak = norm.empty() ? 0.0 : *std::max_element(norm.begin(), norm.end());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(norm[i] > floor * peak)) continue;
        const double y = std::log(norm[i]);
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
        cnt += 1;
    }
    if (cnt < 2) throw InvalidArgument("not enough nonzero kernel samples to fit a slope");
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace isp
