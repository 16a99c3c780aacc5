#pragma once

#include <array>
#include <span>
#include <vector>

#include "isp/domain.hpp"
#include "isp/line_function.hpp"

namespace isp {

// ---------------------------------------------------------------------------
// Bounded solutions

struct BoundedOptions {
    double step = 0.01;
    double tail_tol = 1e-12;
    double sweep_tol = 1e-12;
    int max_sweeps = 50;
};

/// Solution of -i y' + Q y = lambda sigma y with y1 ~ e^{i lambda sigma1 x} A,
/// y2 ~ e^{i lambda sigma2 x} B as x -> inf.
struct BoundedSolution {
    double lambda = 0.0;
    double step = 0.0;
    std::vector<double> x;
    std::vector<Vec> y;  // 2n entries per x sample, y1 on top
    Vec A, B;
    int sweeps = 0;

    Vec y1(std::size_t i) const { return y[i].head(A.size()); }
    Vec y2(std::size_t i) const { return y[i].tail(B.size()); }
};

BoundedSolution solve_bounded_solution(const MCanonicalPotential& pot, const Dispersion& disp, double lambda,
                                       const Vec& A, const Vec& B, const BoundedOptions& opts = {});

/// Amplitudes recovered from a solution by the integral identity at x = 0.
std::pair<Vec, Vec> asymptotic_coefficients(const BoundedSolution& sol, const MCanonicalPotential& pot,
                                            const Dispersion& disp);

// ---------------------------------------------------------------------------
// Transformation-operator kernels

struct KernelOptions {
    double step = 0.01;  // in x and in t - x
    double tail_tol = 1e-12;
    int snapshot_stride = 50;
    int max_local_iter = 200;  // successive approximation at one node (serial path)
    double local_tol = 1e-15;
    Exec exec = Exec::Parallel;
    double x_max = 0.0;  // 0: from the envelope and tail_tol
    double t_max = 0.0;  // 0: no cap; otherwise the triangle is cut at theta * t_max
};

/// K(x, t) = [[A11, A12], [A21, A22]] on t >= x >= 0, truncated to the
/// triangle x + theta (t - x) <= x_max. Stored: the full-resolution row x = 0,
/// the diagonal trace K(x, x) and a decimated snapshot for export.
class TOKernels {
public:
    TOKernels(int n, double step, double x_max, double theta, double eps, int snapshot_stride);

    int n() const noexcept { return n_; }
    int dim() const noexcept { return 2 * n_; }
    double step() const noexcept { return h_; }
    double x_max() const noexcept { return x_max_; }
    double t_extent() const noexcept { return h_ * double(n_tau_ - 1); }
    double theta() const noexcept { return theta_; }
    double eps() const noexcept { return eps_; }
    double c_tilde() const noexcept { return c_tilde_; }
    std::size_t n_x() const noexcept { return n_x_; }
    std::size_t n_tau() const noexcept { return n_tau_; }
    int snapshot_stride() const noexcept { return stride_; }

    /// Samples of K(0, t)_{r,c} at t = m h.
    std::span<const cplx> origin_row(int r, int c) const;
    /// K(0, t) with cubic interpolation in t (zero past the truncation).
    Mat origin(double t) const;
    /// K(x, x) at x = i h.
    const Mat& trace_node(std::size_t i) const { return trace_[i]; }
    /// K(x, x) with cubic interpolation in x (zero past the truncation).
    Mat trace(double x) const;

    /// Snapshot rows are x = i * stride * h, columns t - x = m * stride * h.
    std::size_t snapshot_rows() const noexcept { return snap_rows_; }
    std::size_t snapshot_cols() const noexcept { return snap_cols_; }
    cplx snapshot(std::size_t row, std::size_t col, int r, int c) const;

    /// Envelope check: max over snapshot nodes of |K| e^{eps (x + theta (t - x))}.
    double fitted_c_tilde() const;

    // filled by the solver
    std::vector<cplx>& origin_storage() { return origin_; }
    std::vector<Mat>& trace_storage() { return trace_; }
    std::vector<cplx>& snapshot_storage() { return snap_; }
    void set_c_tilde(double c) { c_tilde_ = c; }

private:
    int n_;
    double h_, x_max_, theta_, eps_;
    int stride_;
    std::size_t n_x_, n_tau_;
    std::size_t snap_rows_, snap_cols_;
    double c_tilde_ = 0.0;
    std::vector<cplx> origin_;  // [(r * dim + c) * n_tau + m]
    std::vector<Mat> trace_;
    std::vector<cplx> snap_;  // [((row * snap_cols + col) * dim + r) * dim + c]
};

TOKernels solve_to_kernels(const MCanonicalPotential& pot, const Dispersion& disp, const KernelOptions& opts = {});

/// Inverts the diagonal trace relation K(x, x) = i xi_c / (xi_c - xi_r) Q(x).
MCanonicalPotential potential_from_kernels(const TOKernels& kernels, const Dispersion& disp);

/// Least-squares slope of log |K(0, t)_{block}| (Frobenius over the block)
/// over t in [t0, t1], skipping samples below floor * max.
double fit_decay_slope(const TOKernels& kernels, Block block, double t0, double t1, double floor = 1e-10);

// ---------------------------------------------------------------------------
// Transforms and scattering data

struct BlockTransforms {
    LineMatrixFunction A11_minus, A21_minus, A12_plus, A22_plus;
};

/// A_{k1-} = int K_{k1}(0,t) e^{i lambda sigma1 t} dt, A_{k2+} likewise with sigma2.
BlockTransforms kernel_transforms(const TOKernels& kernels, const Dispersion& disp, const LambdaGrid& grid);

/// Same transforms at complex lambda: {A11-, A21-, A12+, A22+} per point.
std::vector<std::array<Mat, 4>> kernel_transforms_at(const TOKernels& kernels, const Dispersion& disp,
                                                     std::span<const cplx> lambdas);

struct AHPair {
    LineMatrixFunction plus, minus;
};

AHPair assemble_AH(const BlockTransforms& blocks, const BoundaryMatrix& H);

/// S = (I + AH+)^{-1} (I + AH-). Throws SingularFactor at the first grid point
/// where |det(I + AH+)| <= singular_tol.
LineMatrixFunction scattering_matrix(const LineMatrixFunction& AH_plus, const LineMatrixFunction& AH_minus,
                                     double singular_tol = 1e-10, double strip = 0.0);

struct Transmission {
    LineMatrixFunction P, Pi;
};

Transmission transmission_matrix(const BlockTransforms& blocks, double singular_tol = 1e-10);

/// min(-theta eps / xi_1, theta eps / xi_2n).
double strip_estimate(double theta, double eps, const Dispersion& disp);

struct ShiftedLine {
    double delta;  // Im lambda of the line
    std::vector<Mat> AH_plus, AH_minus;
};

/// AH+/- on the line Im lambda = delta above the real points of grid.
ShiftedLine shifted_AH(const TOKernels& kernels, const Dispersion& disp, const BoundaryMatrix& H,
                       const LambdaGrid& grid, double delta);

struct LineDeterminants {
    double delta = 0.0;
    double min_det_plus = 0.0, min_det_minus = 0.0;
    double argmin_plus = 0.0, argmin_minus = 0.0;
};

struct StripReport {
    LineDeterminants real_axis;
    std::vector<LineDeterminants> shifted;
    double edge_residual_plus = 0.0;   // max |det(I + AH+) - 1| at the two grid ends
    double edge_residual_minus = 0.0;
};

StripReport strip_diagnostics(const LineMatrixFunction& AH_plus, const LineMatrixFunction& AH_minus,
                              std::span<const ShiftedLine> shifted = {});

}  // namespace isp
