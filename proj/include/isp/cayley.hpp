#pragma once

#include <span>
#include <vector>

#include "isp/line_function.hpp"

namespace isp {

/// Expansion of a scalar line function on a Cayley grid in the rational basis
///   rho_k(lambda) = (L + i lambda)^k / (L - i lambda)^{k+1},  -N/2 <= k < N/2.
/// Modes k >= 0 are analytic and decaying in the upper half-plane (plus part),
/// modes k < 0 in the lower half-plane (minus part).
class RationalExpansion {
public:
    RationalExpansion(const LambdaGrid& grid, std::span<const cplx> samples);

    double scale() const noexcept { return L_; }
    std::size_t size() const noexcept { return coef_.size(); }
    /// Coefficient of rho_k, k in [-N/2, N/2).
    cplx coefficient(long k) const;

    /// Grid samples of the plus part (k >= 0) and the minus part (k < 0).
    std::vector<cplx> plus_samples() const;
    std::vector<cplx> minus_samples() const;

    /// Sum of |a_k|^2 over the plus or minus modes.
    double plus_energy() const;
    double minus_energy() const;

    /// Plus part at Im lambda >= 0 or minus part at Im lambda <= 0 (any lambda
    /// where the series converges).
    cplx eval_plus(cplx lambda) const;
    cplx eval_minus(cplx lambda) const;

    /// Half-line profiles: plus part = int_0^inf c(s) e^{i lambda s} ds and
    /// minus part = int_0^inf c(s) e^{-i lambda s} ds. Returns c on s.
    std::vector<cplx> plus_profile(std::span<const double> s) const;
    std::vector<cplx> minus_profile(std::span<const double> s) const;

private:
    std::vector<cplx> synthesize(bool plus) const;
    std::vector<cplx> laguerre_sum(std::span<const double> s, bool plus) const;

    std::vector<double> lambda_;
    double L_;
    std::vector<cplx> coef_;  // FFT order: index k mod N
};

/// Same projections applied to every entry of a matrix function.
LineMatrixFunction project_plus(const LineMatrixFunction& f);
LineMatrixFunction project_minus(const LineMatrixFunction& f);

/// In-place scalar projections on raw Cayley-grid samples; the workhorse of
/// the Riemann-Hilbert iteration.
class CayleyProjector {
public:
    explicit CayleyProjector(const LambdaGrid& grid);
    ~CayleyProjector();
    CayleyProjector(const CayleyProjector&) = delete;
    CayleyProjector& operator=(const CayleyProjector&) = delete;

    std::size_t size() const noexcept { return n_; }
    /// v <- plus part of v (keep_plus) or minus part.
    void project(std::span<cplx> v, bool keep_plus);

private:
    std::size_t n_;
    std::vector<cplx> weight_;  // L - i lambda_j
    std::vector<cplx> buf_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

}  // namespace isp
