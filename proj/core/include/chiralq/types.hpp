#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace chiralq {

inline constexpr double kPi = std::numbers::pi;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat4c = Eigen::Matrix4cd;
using State = Eigen::Vector4cd;
using cplx = std::complex<double>;

}  // namespace chiralq
