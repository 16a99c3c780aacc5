#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isp/types.hpp"

namespace isp {

/// Ordered diagonal speeds of the characteristic matrix: the first n are
/// negative, the last n positive, all strictly increasing.
class Dispersion {
public:
    explicit Dispersion(std::vector<double> xi);

    int n() const noexcept { return static_cast<int>(xi_.size() / 2); }
    std::span<const double> xi() const noexcept { return xi_; }
    double operator[](std::size_t i) const { return xi_[i]; }
    double first() const noexcept { return xi_.front(); }
    double last() const noexcept { return xi_.back(); }

private:
    std::vector<double> xi_;
};

/// Minima of the four ratio families; a family with no admissible (k, j)
/// pair is empty.
struct ThetaFamilies {
    std::optional<double> theta1, theta2, theta3, theta4;
};

ThetaFamilies theta_families(const Dispersion& disp);

/// Kernel decay exponent: the minimum over the non-empty families.
double theta_exponent(const Dispersion& disp);

struct ExpTerm {
    cplx gamma;
    double rate;
};

struct SampledData {
    double dx = 0.0;
    std::vector<cplx> values;
    double tail_rate = 0.0;
};

/// A complex scalar function on the half-line with exponential decay. Either a
/// finite exponential sum or uniform samples from x = 0 with linear
/// interpolation and an exponential tail past the last sample.
class ScalarProfile {
public:
    ScalarProfile() = default;

    static ScalarProfile exp_sum(std::vector<ExpTerm> terms);
    static ScalarProfile sampled(double dx, std::vector<cplx> values, double tail_rate);

    /// Sum of c_i * p_i. Stays an exponential sum when every input is one,
    /// otherwise samples on [0, length] with step dx.
    static ScalarProfile combine(const std::vector<std::pair<cplx, ScalarProfile>>& terms, double dx,
                                 double length);

    bool is_zero() const noexcept;
    bool is_exp_sum() const noexcept { return !sampled_.has_value(); }
    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    const SampledData& samples() const { return *sampled_; }

    cplx operator()(double x) const;

    /// Integral of c(t) e^{i omega t} over [x, inf). Requires
    /// Im(omega) > -decay_rate() for convergence.
    cplx tail_transform(double x, cplx omega) const;

    ScalarProfile scaled(cplx factor) const;
    /// x -> c(x / stretch).
    ScalarProfile stretched(double stretch) const;

    /// Smallest decay rate present (infinity for the zero profile).
    double decay_rate() const;
    /// Upper bound on sup_x |c(x)| e^{rate x}: sum of |gamma| for exponential
    /// sums, max over the samples otherwise. Infinite if rate exceeds the
    /// decay rate.
    double amplitude_bound(double rate) const;

private:
    std::vector<ExpTerm> terms_;
    std::optional<SampledData> sampled_;
};

enum class Block { B11 = 0, B12 = 1, B21 = 2, B22 = 3 };

inline constexpr std::array<Block, 4> kAllBlocks{Block::B11, Block::B12, Block::B21, Block::B22};

std::string potential_block_name(Block b);
std::string kernel_block_name(Block b);
std::optional<Block> parse_block(const std::string& name);

/// Row/column offsets of a block inside the 2n x 2n matrix.
inline int block_row_offset(Block b, int n) { return (b == Block::B21 || b == Block::B22) ? n : 0; }
inline int block_col_offset(Block b, int n) { return (b == Block::B12 || b == Block::B22) ? n : 0; }

/// Structural admissibility of entry (k, j), 0-based, of a potential block:
/// q11 strictly lower, q12 lower anti-, q21 upper anti-, q22 strictly upper
/// triangular.
bool potential_entry_allowed(Block b, int n, int k, int j);

/// Same for the transformation-operator kernels, where the diagonal of the
/// 11 and 22 blocks is admissible.
bool kernel_entry_allowed(Block b, int n, int k, int j);

struct Envelope {
    double C = 0.0;
    double eps = 1.0;
};

/// Length beyond which the envelope C e^{-eps x} is below tail_tol.
double truncation_length(const Envelope& env, double tail_tol);

/// The 2n x 2n potential in four n x n blocks of scalar profiles.
class MCanonicalPotential {
public:
    explicit MCanonicalPotential(int n);

    int n() const noexcept { return n_; }

    const ScalarProfile& entry(Block b, int k, int j) const;
    void set_entry(Block b, int k, int j, ScalarProfile p);

    /// Entry (r, c) of the full 2n x 2n matrix.
    const ScalarProfile& full_entry(int r, int c) const;

    Mat matrix(double x) const;
    bool is_zero() const;

    /// Declared envelope; falls back to one fitted from the profiles.
    Envelope envelope() const;
    void set_envelope(Envelope env) { envelope_ = env; }
    bool has_declared_envelope() const noexcept { return envelope_.has_value(); }
    Envelope fitted_envelope() const;

private:
    int n_;
    std::vector<ScalarProfile> entries_;  // 4 blocks of n*n, row-major
    std::optional<Envelope> envelope_;
};

struct Violation {
    std::string rule;  // "structure" or "envelope"
    Block block;
    int k;  // 1-based, as reported
    int j;
    double x;  // where the envelope failed, NaN for structure
    std::string message;
};

struct ValidationOptions {
    double check_step = 0.05;
    double tail_tol = 1e-12;
    double slack = 1e-12;
};

std::vector<Violation> validate_potential(const MCanonicalPotential& pot, const ValidationOptions& opts = {});

/// Boundary matrix H in y2(0) = H y1(0).
class BoundaryMatrix {
public:
    explicit BoundaryMatrix(Mat h, double singular_tol = 1e-10);

    int n() const noexcept { return static_cast<int>(h_.rows()); }
    const Mat& matrix() const noexcept { return h_; }
    const Mat& inverse() const noexcept { return inv_; }

private:
    Mat h_;
    Mat inv_;
};

}  // namespace isp
