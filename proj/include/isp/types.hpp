#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace isp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Serial is the reference path: no OpenMP, every entry computed, fixed
// evaluation order. Parallel exploits structure and threads.
enum class Exec { Serial, Parallel };

}  // namespace isp
