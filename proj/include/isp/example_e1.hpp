#pragma once

#include <vector>

#include "isp/domain.hpp"
#include "isp/line_function.hpp"
#include "isp/rh.hpp"

namespace isp {

/// System whose only couplings are to the slowest and fastest components:
///   -i z_k' + c_{k,1} z_1 + c_{k,2n} z_{2n} = lambda xi_k z_k,  k = 2..2n-1,
/// with z_1 and z_{2n} free.
class E1System {
public:
    /// c_first[k - 2] = c_{k,1}, c_last[k - 2] = c_{k,2n} for k = 2..2n-1.
    E1System(Dispersion disp, std::vector<ScalarProfile> c_first, std::vector<ScalarProfile> c_last);

    int n() const noexcept { return disp_.n(); }
    const Dispersion& disp() const noexcept { return disp_; }
    /// 1-based component index k in 2..2n-1.
    const ScalarProfile& c_first(int k) const { return first_.at(std::size_t(k - 2)); }
    const ScalarProfile& c_last(int k) const { return last_.at(std::size_t(k - 2)); }
    const std::vector<ScalarProfile>& c_first_all() const noexcept { return first_; }
    const std::vector<ScalarProfile>& c_last_all() const noexcept { return last_; }

    bool is_exp_sum() const;

    /// The same system as a 2n x 2n potential (Q = -c on the coupling entries).
    MCanonicalPotential embed() const;

private:
    Dispersion disp_;
    std::vector<ScalarProfile> first_, last_;
};

/// Boundary z_{2n}(0) = z_1(0), z_{n+k}(0) = sum_{j=2..n} h_kj z_j(0).
class E1Boundary {
public:
    /// h1(k - 1, j - 2) = h_kj, k = 1..n-1, j = 2..n.
    explicit E1Boundary(Mat h1, double singular_tol = 1e-10);

    int n() const noexcept { return int(h1_.rows()) + 1; }
    const Mat& h1() const noexcept { return h1_; }
    cplx h(int k, int j) const { return h1_(k - 1, j - 2); }
    /// The full n x n boundary matrix.
    Mat full() const;

private:
    Mat h1_;
};

/// Closed-form S_H: identity plus the column-n entries
/// S_{k,n} = C_{k-} + C_{k+}, k = 1..n-1.
LineMatrixFunction e1_scattering(const E1System& sys, const E1Boundary& bnd, const LambdaGrid& grid);

/// The same S_H - I as an exact rational function (exponential-sum profiles only).
RationalMatrix e1_scattering_rational(const E1System& sys, const E1Boundary& bnd);

/// C_{k+} and C_{k-} separately, as scalar functions on the grid.
std::vector<SplitResult> e1_transform_parts(const E1System& sys, const E1Boundary& bnd, const LambdaGrid& grid);

/// Half-line profiles c_{k-}(s), c_{k+}(s) straight from the coefficients.
struct E1Profiles {
    std::vector<double> s;
    std::vector<std::vector<cplx>> c_minus, c_plus;  // [k - 1][i]
    double ds() const { return s.size() > 1 ? s[1] - s[0] : 0.0; }
};

E1Profiles e1_true_profiles(const E1System& sys, const E1Boundary& bnd, const std::vector<double>& s);

struct E1Solution {
    std::vector<double> x;
    std::vector<Vec> z;  // 2n components per x
};

/// Explicit bounded solution with z_k ~ a_k e^{i lambda xi_k x}, z_{n+k} ~ b_k e^{i lambda xi_{n+k} x}.
E1Solution e1_explicit_solution(const E1System& sys, double lambda, const Vec& a, const Vec& b,
                                const std::vector<double>& x);

/// Column-n entries of S_H split into plus and minus parts.
std::vector<SplitResult> e1_split(const LineMatrixFunction& S, double edge_tol = 1e-3);

/// Inverse transforms of the split parts on a uniform s grid [0, s_max].
E1Profiles e1_invert_transforms(const std::vector<SplitResult>& splits, double ds, double s_max);

/// M such that |c_{k+-}(s)| <= M e^{-rate s} on the grid.
double e1_profile_bound(const E1Profiles& p, double rate);

struct E1Recovery {
    std::vector<ScalarProfile> c_first, c_last;  // same indexing as E1System
    double min_singular_minus = 0.0, min_singular_plus = 0.0;
    int rank = 0;
    int unknowns = 0;
};

/// Solves the per-s linear systems for the coefficients from one or two
/// (profiles, boundary) pairs. RankDeficient when the systems lose rank.
E1Recovery e1_solve_coefficients(const std::vector<E1Profiles>& profiles, const std::vector<E1Boundary>& bnds,
                                 const Dispersion& disp, double singular_cutoff = 1e-10);

struct E1RoundtripOptions {
    double edge_tol = 1e-3;
    double ds = 0.02;
    double s_max = 0.0;      // 0: (xi_2n - xi_1) * x_max
    double x_check = 10.0;   // compare on [0, x_check]
    double tail_tol = 1e-12;
};

struct E1RoundtripReport {
    std::vector<double> err_first, err_last;  // relative, per coefficient
    double max_rel_error = 0.0;
    double scattering_error = 0.0;  // numeric vs exact rational S (0 when not exp sums)
    double min_singular_minus = 0.0, min_singular_plus = 0.0;
    E1Recovery recovery;
};

E1RoundtripReport e1_roundtrip(const E1System& sys, const E1Boundary& bnd, const E1Boundary& bnd_tilde,
                               const LambdaGrid& grid, const E1RoundtripOptions& opts = {});

}  // namespace isp
