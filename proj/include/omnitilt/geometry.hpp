#pragma once

#include <Eigen/Dense>

namespace omnitilt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline Vec3 e3() { return Vec3::UnitZ(); }

/// Skew-symmetric matrix with hat(a) * b == a.cross(b).
Mat3 hat(const Vec3& a);

/// Inverse of hat. Throws std::invalid_argument when the symmetric part of S
/// has Frobenius norm above `tolerance`.
Vec3 vee(const Mat3& S, double tolerance = 1e-8);

/// Scalar saturation: clamps y to [-sigma, sigma].
double sat(double y, double sigma);

/// Componentwise saturation for any Eigen column vector.
template <typename Derived>
typename Derived::PlainObject sat(const Eigen::MatrixBase<Derived>& y, double sigma)
{
  return y.cwiseMax(-sigma).cwiseMin(sigma);
}

/// e_R = 1/2 (Rd^T R - R^T Rd)^vee.
Vec3 rotation_error(const Mat3& R, const Mat3& Rd);

/// Psi(R, Rd) = 1/2 tr(I - Rd^T R), in [0, 2].
double psi(const Mat3& R, const Mat3& Rd);

/// Rodrigues exponential of the rotation vector w * dt.
Mat3 exp_so3(const Vec3& w, double dt = 1.0);

/// Nearest orthonormal matrix with det +1 (polar projection via SVD).
Mat3 project_to_so3(const Mat3& M);

bool is_rotation(const Mat3& R, double tolerance = 1e-9);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

}  // namespace omnitilt
