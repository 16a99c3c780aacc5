#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "isp/types.hpp"

namespace isp {

enum class GridKind { Uniform, Cayley, Custom };

/// Real spectral-parameter samples.
///
/// Uniform: N equispaced points with both endpoints -Lambda and Lambda.
/// Cayley: lambda_j = L tan(theta_j / 2) with theta_j = -pi + (j + 1/2) 2 pi / N
/// and L chosen so that the outermost nodes sit at +-Lambda. Equispaced in
/// theta, so the half-plane projections reduce to FFT masking.
/// Custom: any strictly increasing list.
class LambdaGrid {
public:
    static LambdaGrid uniform(double lambda_max, std::size_t n);
    static LambdaGrid cayley(double lambda_max, std::size_t n);
    static LambdaGrid custom(std::vector<double> points);

    GridKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return pts_.size(); }
    std::span<const double> points() const noexcept { return pts_; }
    double operator[](std::size_t i) const { return pts_[i]; }
    double lambda_max() const noexcept { return lambda_max_; }
    /// Cayley scale L (0 for other kinds).
    double cayley_scale() const noexcept { return scale_; }

    bool operator==(const LambdaGrid& o) const noexcept {
        return kind_ == o.kind_ && pts_ == o.pts_;
    }

private:
    GridKind kind_ = GridKind::Custom;
    std::vector<double> pts_;
    double lambda_max_ = 0.0;
    double scale_ = 0.0;
};

std::string grid_kind_name(GridKind k);

enum class HalfPlane { None, Plus, Minus, Strip };

/// Declared analyticity: Plus means analytic in Im lambda > -delta, Minus in
/// Im lambda < delta, Strip in |Im lambda| < delta.
struct Analyticity {
    HalfPlane kind = HalfPlane::None;
    double delta = 0.0;
};

std::string half_plane_name(HalfPlane h);

/// m x m complex matrix sampled on a lambda grid.
class LineMatrixFunction {
public:
    LineMatrixFunction(LambdaGrid grid, int m, Analyticity tag = {});

    static LineMatrixFunction from_function(const LambdaGrid& grid, int m, const std::function<Mat(double)>& f,
                                            Analyticity tag = {});
    static LineMatrixFunction identity(const LambdaGrid& grid, int m);

    const LambdaGrid& grid() const noexcept { return grid_; }
    int m() const noexcept { return m_; }
    std::size_t size() const noexcept { return values_.size(); }

    Mat& operator[](std::size_t i) { return values_[i]; }
    const Mat& operator[](std::size_t i) const { return values_[i]; }

    const Analyticity& analyticity() const noexcept { return tag_; }
    void set_analyticity(Analyticity tag) { tag_ = tag; }

    /// Samples of one entry across the grid.
    std::vector<cplx> entry(int r, int c) const;
    void set_entry(int r, int c, std::span<const cplx> v);

    LineMatrixFunction& operator+=(const LineMatrixFunction& o);
    LineMatrixFunction& operator-=(const LineMatrixFunction& o);
    LineMatrixFunction& operator*=(cplx a);

    /// max over grid and entries of |f - g|.
    double max_abs_diff(const LineMatrixFunction& o) const;
    /// max over grid of the spectral norm.
    double sup_norm() const;

private:
    LambdaGrid grid_;
    int m_;
    std::vector<Mat> values_;
    Analyticity tag_;
};

LineMatrixFunction operator+(LineMatrixFunction a, const LineMatrixFunction& b);
LineMatrixFunction operator-(LineMatrixFunction a, const LineMatrixFunction& b);
LineMatrixFunction operator*(cplx s, LineMatrixFunction a);

/// Throws GridMismatch unless all functions share one grid and size.
void require_same_grid(std::initializer_list<const LineMatrixFunction*> fs);

}  // namespace isp
