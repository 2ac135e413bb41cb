#pragma once

#include <Eigen/Dense>

#include <span>

namespace dvlalign {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Proper rotation matrix. R_ab maps vectors expressed in frame b into frame a.
using RotationMatrix = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Roll, pitch and yaw in radians (intrinsic Z-Y-X sequence).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  static EulerAngles from_degrees(double roll_deg, double pitch_deg, double yaw_deg) {
    return {roll_deg * kDegToRad, pitch_deg * kDegToRad, yaw_deg * kDegToRad};
  }
  Vector3 as_vector() const { return {roll, pitch, yaw}; }
  bool operator==(const EulerAngles&) const = default;
};

struct EulerDecomposition {
  EulerAngles angles;
  // |R31| within 1e-9 of one: roll is fixed at zero and the remainder folded into yaw.
  bool gimbal_lock = false;
};

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
RotationMatrix euler_to_rotmat(const EulerAngles& a);

/// Inverse of euler_to_rotmat. Pitch lands in [-pi/2, pi/2], roll and yaw in (-pi, pi].
EulerDecomposition rotmat_to_euler(const RotationMatrix& r);

Matrix3 skew(const Vector3& w);

/// Closed-form exp(skew(rotvec)).
RotationMatrix rodrigues(const Vector3& rotvec);

/// Nearest orthogonal matrix with det = +1 in the Frobenius sense.
RotationMatrix orthonormalize(const Matrix3& m);

/// max |(R^T R - I)_ij| together with |det R - 1|.
double orthonormality_defect(const Matrix3& r);

/// Maps an angle into (-pi, pi].
double wrap_angle(double a);

enum class RmseNormalization {
  kPerAngle,  // divide the summed squares by 3N
  kSummed,    // divide by N only, i.e. sqrt of the summed-axis MSE
};

/// RMSE over all samples and the three angles, in degrees. Differences are wrapped
/// before squaring. Throws std::invalid_argument on empty or mismatched input.
double angle_rmse(std::span<const EulerAngles> truth, std::span<const EulerAngles> est,
                  RmseNormalization norm = RmseNormalization::kPerAngle);

}  // namespace dvlalign
