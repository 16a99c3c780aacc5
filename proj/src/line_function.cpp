#include "isp/line_function.hpp"

#include <cmath>

#include "isp/errors.hpp"

namespace isp {

LambdaGrid LambdaGrid::uniform(double lambda_max, std::size_t n) {
    if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
    if (n < 2) throw ValidationError("uniform grid needs at least two points");
    LambdaGrid g;
    g.kind_ = GridKind::Uniform;
    g.lambda_max_ = lambda_max;
    g.pts_.resize(n);
    const double step = 2.0 * lambda_max / double(n - 1);
    for (std::size_t j = 0; j < n; ++j) g.pts_[j] = -lambda_max + double(j) * step;
    g.pts_.back() = lambda_max;
    return g;
}

LambdaGrid LambdaGrid::cayley(double lambda_max, std::size_t n) {
    if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
    if (n < 4 || (n & (n - 1)) != 0) throw ValidationError("Cayley grid size must be a power of two >= 4");
    LambdaGrid g;
    g.kind_ = GridKind::Cayley;
    g.lambda_max_ = lambda_max;
    g.scale_ = lambda_max * std::tan(kPi / (2.0 * double(n)));
    g.pts_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = -kPi + (double(j) + 0.5) * 2.0 * kPi / double(n);
        g.pts_[j] = g.scale_ * std::tan(0.5 * theta);
    }
    // the mirrored nodes are exact negatives of each other
    for (std::size_t j = 0; j < n / 2; ++j) g.pts_[j] = -g.pts_[n - 1 - j];
    return g;
}

LambdaGrid LambdaGrid::custom(std::vector<double> points) {
    if (points.empty()) throw ValidationError("custom grid is empty");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1])) throw ValidationError("custom grid must be strictly increasing");
    LambdaGrid g;
    g.kind_ = GridKind::Custom;
    g.lambda_max_ = std::max(std::abs(points.front()), std::abs(points.back()));
    g.pts_ = std::move(points);
    return g;
}

std::string grid_kind_name(GridKind k) {
    switch (k) {
        case GridKind::Uniform: return "uniform";
        case GridKind::Cayley: return "cayley";
        case GridKind::Custom: return "custom";
    }
    return "?";
}

std::string half_plane_name(HalfPlane h) {
    switch (h) {
        case HalfPlane::None: return "none";
        case HalfPlane::Plus: return "plus";
        case HalfPlane::Minus: return "minus";
        case HalfPlane::Strip: return "strip";
    }
    return "?";
}

LineMatrixFunction::LineMatrixFunction(LambdaGrid grid, int m, Analyticity tag)
    : grid_(std::move(grid)), m_(m), values_(grid_.size(), Mat::Zero(m, m)), tag_(tag) {
    if (m < 1) throw InvalidArgument("matrix size must be positive");
}

LineMatrixFunction LineMatrixFunction::from_function(const LambdaGrid& grid, int m,
                                                     const std::function<Mat(double)>& f, Analyticity tag) {
    LineMatrixFunction out(grid, m, tag);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.values_[i] = f(grid[i]);
        if (out.values_[i].rows() != m || out.values_[i].cols() != m)
            throw InvalidArgument("sample has the wrong shape");
    }
    return out;
}

LineMatrixFunction LineMatrixFunction::identity(const LambdaGrid& grid, int m) {
    LineMatrixFunction out(grid, m);
    for (auto& v : out.values_) v.setIdentity();
    return out;
}

std::vector<cplx> LineMatrixFunction::entry(int r, int c) const {
    std::vector<cplx> v(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) v[i] = values_[i](r, c);
    return v;
}

void LineMatrixFunction::set_entry(int r, int c, std::span<const cplx> v) {
    if (v.size() != values_.size()) throw GridMismatch("entry length differs from grid length");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i](r, c) = v[i];
}

LineMatrixFunction& LineMatrixFunction::operator+=(const LineMatrixFunction& o) {
    require_same_grid({this, &o});
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

LineMatrixFunction& LineMatrixFunction::operator-=(const LineMatrixFunction& o) {
    require_same_grid({this, &o});
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

LineMatrixFunction& LineMatrixFunction::operator*=(cplx a) {
    for (auto& v : values_) v *= a;
    return *this;
}

double LineMatrixFunction::max_abs_diff(const LineMatrixFunction& o) const {
    require_same_grid({this, &o});
    double d = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        d = std::max(d, (values_[i] - o.values_[i]).cwiseAbs().maxCoeff());
    return d;
}

double LineMatrixFunction::sup_norm() const {
    double d = 0.0;
    for (const auto& v : values_) d = std::max(d, v.operatorNorm());
    return d;
}

LineMatrixFunction operator+(LineMatrixFunction a, const LineMatrixFunction& b) { return a += b; }
LineMatrixFunction operator-(LineMatrixFunction a, const LineMatrixFunction& b) { return a -= b; }
LineMatrixFunction operator*(cplx s, LineMatrixFunction a) { return a *= s; }

void require_same_grid(std::initializer_list<const LineMatrixFunction*> fs) {
    const LineMatrixFunction* first = nullptr;
    for (const auto* f : fs) {
        if (!first) {
            first = f;
            continue;
        }
        if (!(f->grid() == first->grid())) throw GridMismatch("functions are sampled on different grids");
        if (f->m() != first->m()) throw GridMismatch("functions have different matrix sizes");
    }
}

}  // namespace isp
