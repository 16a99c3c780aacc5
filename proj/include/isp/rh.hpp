#pragma once

#include <vector>

#include "isp/forward.hpp"
#include "isp/line_function.hpp"

namespace isp {

/// Matrix rational function sum_p R_p / (lambda - z_p) with no real poles.
class RationalMatrix {
public:
    explicit RationalMatrix(int m) : m_(m) {}

    void add_pole(Mat residue, cplx pole);

    int m() const noexcept { return m_; }
    std::size_t pole_count() const noexcept { return poles_.size(); }
    cplx pole(std::size_t p) const { return poles_[p]; }
    const Mat& residue(std::size_t p) const { return residues_[p]; }

    Mat operator()(cplx lambda) const;
    LineMatrixFunction sample(const LambdaGrid& grid, Analyticity tag = {}) const;

    /// Poles below the real axis (analytic above): the plus part.
    RationalMatrix plus_part() const;
    /// Poles above the real axis: the minus part.
    RationalMatrix minus_part() const;

    /// Half-line profile F with int_0^inf F(t) e^{i lambda t} dt = plus part
    /// (plus = true) or int_0^inf F(t) e^{-i lambda t} dt = minus part.
    Mat profile(double t, bool plus) const;

private:
    int m_;
    std::vector<Mat> residues_;
    std::vector<cplx> poles_;
};

struct SplitResult {
    LineMatrixFunction plus, minus;
};

/// Exact partial-fraction split.
std::pair<RationalMatrix, RationalMatrix> plemelj_split(const RationalMatrix& f);

/// Numeric split on a Cayley grid. Throws EdgeDecayViolation when the largest
/// entry at either grid end exceeds edge_tol.
SplitResult plemelj_split(const LineMatrixFunction& f, double edge_tol = 1e-3);

/// Relative share of the wrong half-plane content: for a plus-tagged function
/// sqrt(minus energy / total), and vice versa. Zero functions give 0.
double wrong_side_content(const LineMatrixFunction& f, HalfPlane side);

struct RHOptions {
    double gmres_tol = 1e-13;
    int restart = 80;
    int max_iter = 3000;
    int probe_steps = 60;
    double probe_tol = 1e-8;
    double singular_tol = 1e-10;
    double edge_tol = 1e-3;
};

struct RHResult {
    LineMatrixFunction AH_plus, AH_minus;
    int iterations = 0;
    double gmres_residual = 0.0;     // relative, of the discrete equation
    double factorization_residual = 0.0;  // max over grid of |(I + AH+) S - (I + AH-)|
    double probe_sigma_min = 0.0;
};

/// Canonical factorization (I + AH+) S = I + AH- of S on a Cayley grid, via
/// the projected equation X + P+[X g] = -P+[g] with g = S - I solved by GMRES.
/// SingularScattering if det S vanishes on the grid; FredholmSingular if the
/// discrete operator is numerically singular or GMRES stalls.
RHResult solve_regular_rh(const LineMatrixFunction& S, const RHOptions& opts = {});

struct RecoveryOptions {
    double singular_tol = 1e-10;
    double consistency_tol = 1e-8;  // relative
};

struct RecoveryResult {
    BlockTransforms blocks;
    double a22_disagreement = 0.0;
    double a21_disagreement = 0.0;
};

/// The four block transforms from two factorizations with boundary matrices
/// H1, H2. DegenerateBoundaryPair if det(H1 - H2) vanishes; InconsistentInputs
/// if the two expressions for A22+ or A21- disagree.
RecoveryResult recover_blocks(const LineMatrixFunction& AH1_plus, const LineMatrixFunction& AH1_minus,
                              const LineMatrixFunction& AH2_plus, const LineMatrixFunction& AH2_minus,
                              const BoundaryMatrix& H1, const BoundaryMatrix& H2, const RecoveryOptions& opts = {});

struct SolvabilityReport {
    double min_abs_det = 0.0;
    double argmin_lambda = 0.0;
    bool nonsingular = true;
    bool real_part_definite = false;  // (S + S^*)/2 positive or negative definite everywhere
    bool imag_part_definite = false;  // (S - S^*)/(2i)
    double edge_residual = 0.0;       // max |S - I| at the grid ends
};

SolvabilityReport solvability_report(const LineMatrixFunction& S, double singular_tol = 1e-10);

}  // namespace isp
