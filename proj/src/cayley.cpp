#include "isp/cayley.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "isp/errors.hpp"

namespace isp {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

fftw_plan make_plan(std::vector<cplx>& buf, int sign) {
    std::lock_guard lock(plan_mutex());
    return fftw_plan_dft_1d(static_cast<int>(buf.size()), as_fftw(buf.data()), as_fftw(buf.data()), sign,
                            FFTW_ESTIMATE);
}

void destroy_plan(fftw_plan p) {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(p);
}

void fft_inplace(std::vector<cplx>& buf, int sign) {
    fftw_plan p = make_plan(buf, sign);
    fftw_execute(p);
    destroy_plan(p);
}

void require_cayley(const LambdaGrid& g) {
    if (g.kind() != GridKind::Cayley)
        throw GridMismatch("half-plane projection needs a Cayley grid");
}

long signed_mode(std::size_t idx, std::size_t n) {
    return idx < n / 2 ? static_cast<long>(idx) : static_cast<long>(idx) - static_cast<long>(n);
}

}  // namespace

RationalExpansion::RationalExpansion(const LambdaGrid& grid, std::span<const cplx> samples)
    : lambda_(grid.points().begin(), grid.points().end()), L_(grid.cayley_scale()) {
    require_cayley(grid);
    if (samples.size() != grid.size()) throw GridMismatch("sample count differs from grid size");
    const std::size_t n = grid.size();
    coef_.resize(n);
    for (std::size_t j = 0; j < n; ++j) coef_[j] = cplx(L_, -lambda_[j]) * samples[j];
    fft_inplace(coef_, FFTW_FORWARD);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const long k = signed_mode(idx, n);
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        coef_[idx] *= sgn * std::exp(cplx(0.0, -kPi * double(k) / double(n))) / double(n);
    }
}

cplx RationalExpansion::coefficient(long k) const {
    const long n = static_cast<long>(coef_.size());
    if (k < -n / 2 || k >= n / 2) return 0.0;
    return coef_[static_cast<std::size_t>((k + n) % n)];
}

std::vector<cplx> RationalExpansion::synthesize(bool plus) const {
    const std::size_t n = coef_.size();
    std::vector<cplx> buf(n, 0.0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const long k = signed_mode(idx, n);
        if ((k >= 0) != plus) continue;
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        buf[idx] = coef_[idx] * sgn * std::exp(cplx(0.0, kPi * double(k) / double(n)));
    }
    fft_inplace(buf, FFTW_BACKWARD);
    for (std::size_t j = 0; j < n; ++j) buf[j] /= cplx(L_, -lambda_[j]);
    return buf;
}

std::vector<cplx> RationalExpansion::plus_samples() const { return synthesize(true); }
std::vector<cplx> RationalExpansion::minus_samples() const { return synthesize(false); }

double RationalExpansion::plus_energy() const {
    double e = 0.0;
    for (std::size_t idx = 0; idx < coef_.size() / 2; ++idx) e += std::norm(coef_[idx]);
    return e;
}

double RationalExpansion::minus_energy() const {
    double e = 0.0;
    for (std::size_t idx = coef_.size() / 2; idx < coef_.size(); ++idx) e += std::norm(coef_[idx]);
    return e;
}

cplx RationalExpansion::eval_plus(cplx lambda) const {
    const cplx num = L_ + kI * lambda, den = L_ - kI * lambda;
    const cplx z = num / den;
    cplx acc = 0.0;
    for (long k = static_cast<long>(coef_.size() / 2) - 1; k >= 0; --k) acc = acc * z + coefficient(k);
    return acc / den;
}

cplx RationalExpansion::eval_minus(cplx lambda) const {
    const cplx num = L_ - kI * lambda, den = L_ + kI * lambda;
    const cplx z = num / den;
    cplx acc = 0.0;
    for (long m = static_cast<long>(coef_.size() / 2) - 1; m >= 0; --m) acc = acc * z + coefficient(-m - 1);
    return acc / den;
}

std::vector<cplx> RationalExpansion::laguerre_sum(std::span<const double> s, bool plus) const {
    const long half = static_cast<long>(coef_.size() / 2);
    std::vector<cplx> out(s.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < s.size(); ++i) {
        // Laguerre functions phi_k(x) = e^{-x/2} L_k(x) at x = 2 L s stay bounded
        // by 1 and obey the plain three-term recurrence.
        const double x = 2.0 * L_ * s[i];
        double prev = 0.0, cur = std::exp(-0.5 * x);
        cplx acc = 0.0;
        for (long k = 0; k < half; ++k) {
            const cplx a = plus ? coefficient(k) : coefficient(-k - 1);
            acc += (k % 2 == 0 ? 1.0 : -1.0) * a * cur;
            const double next = ((2.0 * double(k) + 1.0 - x) * cur - double(k) * prev) / double(k + 1);
            prev = cur;
            cur = next;
        }
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> RationalExpansion::plus_profile(std::span<const double> s) const { return laguerre_sum(s, true); }
std::vector<cplx> RationalExpansion::minus_profile(std::span<const double> s) const {
    return laguerre_sum(s, false);
}

namespace {

LineMatrixFunction project(const LineMatrixFunction& f, bool plus) {
    require_cayley(f.grid());
    LineMatrixFunction out(f.grid(), f.m(), {plus ? HalfPlane::Plus : HalfPlane::Minus, 0.0});
    CayleyProjector proj(f.grid());
    for (int r = 0; r < f.m(); ++r)
        for (int c = 0; c < f.m(); ++c) {
            auto v = f.entry(r, c);
            proj.project(v, plus);
            out.set_entry(r, c, v);
        }
    return out;
}

}  // namespace

LineMatrixFunction project_plus(const LineMatrixFunction& f) { return project(f, true); }
LineMatrixFunction project_minus(const LineMatrixFunction& f) { return project(f, false); }

CayleyProjector::CayleyProjector(const LambdaGrid& grid) : n_(grid.size()), weight_(n_), buf_(n_) {
    require_cayley(grid);
    for (std::size_t j = 0; j < n_; ++j) weight_[j] = cplx(grid.cayley_scale(), -grid[j]);
    fwd_ = make_plan(buf_, FFTW_FORWARD);
    bwd_ = make_plan(buf_, FFTW_BACKWARD);
}

CayleyProjector::~CayleyProjector() {
    destroy_plan(static_cast<fftw_plan>(fwd_));
    destroy_plan(static_cast<fftw_plan>(bwd_));
}

void CayleyProjector::project(std::span<cplx> v, bool keep_plus) {
    if (v.size() != n_) throw GridMismatch("projection input has the wrong length");
    for (std::size_t j = 0; j < n_; ++j) buf_[j] = weight_[j] * v[j];
    fftw_execute(static_cast<fftw_plan>(fwd_));
    // plus modes sit at indices [0, N/2), minus modes at [N/2, N)
    const std::size_t lo = keep_plus ? n_ / 2 : 0, hi = keep_plus ? n_ : n_ / 2;
    for (std::size_t idx = lo; idx < hi; ++idx) buf_[idx] = 0.0;
    fftw_execute(static_cast<fftw_plan>(bwd_));
    const double inv_n = 1.0 / double(n_);
    for (std::size_t j = 0; j < n_; ++j) v[j] = buf_[j] * inv_n / weight_[j];
}

}  // namespace isp
