#pragma once

#include "dvlalign/frames.hpp"
#include "dvlalign/random.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace dvlalign {

using Vector4 = Eigen::Vector4d;
using BeamMatrix = Eigen::Matrix<double, 4, 3>;

/// Janus ("x") four-beam DVL head.
class BeamGeometry {
 public:
  /// Throws DegenerateError unless 0 < pitch < pi/2.
  explicit BeamGeometry(double beam_pitch = 20.0 * kDegToRad);

  double pitch() const { return pitch_; }
  /// Beam yaw (i - 1) * pi/2 + pi/4 for i = 1..4.
  static double beam_yaw(int i);
  /// Rows are the unit beam directions b_1..b_4.
  const BeamMatrix& h() const { return h_; }

 private:
  double pitch_;
  BeamMatrix h_;
};

/// Unit direction of beam i (1-based). Throws std::out_of_range for i outside 1..4.
Vector3 beam_direction(int i, double beam_pitch);

struct DvlErrorConfig {
  double scale = 0.007;                   // common scale factor s
  Vector4 beam_scale = Vector4::Zero();   // optional extra per-beam scale, off by default
  Vector4 bias = Vector4::Constant(0.001);  // m/s per beam
  double noise_std = 0.02;                // m/s per beam, per sample

  static DvlErrorConfig error_free();
  void validate() const;
};

struct ImuErrorConfig {
  Vector3 accel_scale = Vector3::Ones();  // diagonal of S_a
  Vector3 accel_bias = Vector3::Zero();   // m/s^2
  double accel_noise_std = 0.0;           // m/s^2 per sample
  Vector3 gyro_scale = Vector3::Ones();    // diagonal of S_g
  Vector3 gyro_bias = Vector3::Zero();     // rad/s
  double gyro_noise_std = 0.0;             // rad/s per sample

  static ImuErrorConfig error_free();
  /// Biases applied on all axes, white noise two orders of magnitude below them.
  static ImuErrorConfig from_biases(double accel_bias_ug, double gyro_bias_deg_per_hour);
  void validate() const;
};

inline constexpr double kMicroG = 9.80665e-6;                  // m/s^2
inline constexpr double kDegPerHour = kDegToRad / 3600.0;      // rad/s

using BeamVelocities = Vector4;

/// y = H v (1 + s + s_i) + b + n, n ~ N(0, sigma^2 I).
BeamVelocities dvl_measure(const Vector3& v_d, const BeamGeometry& geom, const DvlErrorConfig& err,
                           Rng& rng);

/// (H^T H)^-1 H^T y.
Vector3 dvl_solve_ls(const BeamVelocities& y, const BeamGeometry& geom);

struct ImuMeasurement {
  Vector3 f_b;
  Vector3 w_b;
};

/// f = S_a f + b_a + n_a, w = S_g w + b_g + n_g.
ImuMeasurement imu_measure(const Vector3& f_b, const Vector3& w_b, const ImuErrorConfig& err, Rng& rng);

}  // namespace dvlalign
