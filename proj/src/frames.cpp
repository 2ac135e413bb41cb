#include "dvlalign/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvlalign {

RotationMatrix euler_to_rotmat(const EulerAngles& a) {
  const double cr = std::cos(a.roll), sr = std::sin(a.roll);
  const double cp = std::cos(a.pitch), sp = std::sin(a.pitch);
  const double cy = std::cos(a.yaw), sy = std::sin(a.yaw);
  RotationMatrix r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

EulerDecomposition rotmat_to_euler(const RotationMatrix& r) {
  EulerDecomposition out;
  const double r31 = std::clamp(r(2, 0), -1.0, 1.0);
  if (std::abs(r31) > 1.0 - 1e-9) {
    out.gimbal_lock = true;
    out.angles.roll = 0.0;
    out.angles.pitch = r31 < 0.0 ? kPi / 2.0 : -kPi / 2.0;
    // At pitch = +-pi/2, (R12, R22) = (-sin(yaw -+ roll), cos(yaw -+ roll)).
    out.angles.yaw = wrap_angle(std::atan2(-r(0, 1), r(1, 1)));
    return out;
  }
  out.angles.pitch = std::asin(-r31);
  out.angles.roll = wrap_angle(std::atan2(r(2, 1), r(2, 2)));
  out.angles.yaw = wrap_angle(std::atan2(r(1, 0), r(0, 0)));
  return out;
}

Matrix3 skew(const Vector3& w) {
  Matrix3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

RotationMatrix rodrigues(const Vector3& rotvec) {
  const double angle = rotvec.norm();
  const Matrix3 k = skew(rotvec);
  double a, b;
  if (angle < 1e-4) {
    // Taylor series; truncation error far below double precision at this size.
    const double a2 = angle * angle;
    a = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    b = 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Matrix3::Identity() + a * k + b * k * k;
}

RotationMatrix orthonormalize(const Matrix3& m) {
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return u * d * v.transpose();
}

double orthonormality_defect(const Matrix3& r) {
  const double ortho = (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(r.determinant() - 1.0));
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double angle_rmse(std::span<const EulerAngles> truth, std::span<const EulerAngles> est,
                  RmseNormalization norm) {
  if (truth.empty()) throw std::invalid_argument("angle_rmse: empty input");
  if (truth.size() != est.size()) throw std::invalid_argument("angle_rmse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double dr = wrap_angle(truth[i].roll - est[i].roll);
    const double dp = wrap_angle(truth[i].pitch - est[i].pitch);
    const double dy = wrap_angle(truth[i].yaw - est[i].yaw);
    sum += dr * dr + dp * dp + dy * dy;
  }
  const double n = static_cast<double>(truth.size());
  const double denom = norm == RmseNormalization::kPerAngle ? 3.0 * n : n;
  return std::sqrt(sum / denom) * kRadToDeg;
}

}  // namespace dvlalign
