#pragma once

#include <Eigen/Dense>
#include <complex>

namespace diraclab {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

// A point value u(x) in C^4.
using Spinor = Eigen::Vector4cd;
// 4x4 complex matrices carrying the Dirac algebra.
using SpinorMatrix = Eigen::Matrix4cd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

} // namespace diraclab
