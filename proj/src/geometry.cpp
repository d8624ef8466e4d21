#include "omnitilt/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace omnitilt {

Mat3 hat(const Vec3& a)
{
  Mat3 S;
  S << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& S, double tolerance)
{
  const double asym = (0.5 * (S + S.transpose())).norm();
  if (asym > tolerance) {
    throw std::invalid_argument("vee: matrix is not skew-symmetric (symmetric part norm " +
                                std::to_string(asym) + ")");
  }
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

double sat(double y, double sigma)
{
  if (std::abs(y) > sigma) {
    return y > 0.0 ? sigma : -sigma;
  }
  return y;
}

Vec3 rotation_error(const Mat3& R, const Mat3& Rd)
{
  const Mat3 A = Rd.transpose() * R;
  return 0.5 * vee(A - A.transpose());
}

double psi(const Mat3& R, const Mat3& Rd)
{
  return 0.5 * (3.0 - (Rd.transpose() * R).trace());
}

Mat3 exp_so3(const Vec3& w, double dt)
{
  const Vec3 phi = w * dt;
  const double angle = phi.norm();
  const Mat3 K = hat(phi);
  if (angle < 1e-8) {
    // second-order Taylor expansion; exact to machine precision here
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + a * K + b * K * K;
}

Mat3 project_to_so3(const Mat3& M)
{
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    D(2, 2) = -1.0;
  }
  return svd.matrixU() * D * svd.matrixV().transpose();
}

bool is_rotation(const Mat3& R, double tolerance)
{
  if (!R.allFinite()) {
    return false;
  }
  return (R.transpose() * R - Mat3::Identity()).norm() <= tolerance &&
         std::abs(R.determinant() - 1.0) <= tolerance;
}

Mat3 rot_x(double angle)
{
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}

Mat3 rot_y(double angle)
{
  return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}

Mat3 rot_z(double angle)
{
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace omnitilt
