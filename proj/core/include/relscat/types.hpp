#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace relscat {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// (-i)^l
inline cplx minus_i_pow(int l) {
  switch (((l % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, -1};
    case 2: return {-1, 0};
    default: return {0, 1};
  }
}
inline cplx i_pow(int l) { return minus_i_pow(-l); }

}  // namespace relscat
