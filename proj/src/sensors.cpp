#include "dvlalign/sensors.hpp"

#include "dvlalign/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dvlalign {

namespace {

// Always consumes one draw so that streams stay aligned across error configs.
double gaussian(Rng& rng, double std) { return std * std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

double BeamGeometry::beam_yaw(int i) {
  if (i < 1 || i > 4) throw std::out_of_range("beam index " + std::to_string(i) + " outside 1..4");
  return (i - 1) * kPi / 2.0 + kPi / 4.0;
}

Vector3 beam_direction(int i, double beam_pitch) {
  const double yaw = BeamGeometry::beam_yaw(i);
  return {std::cos(yaw) * std::sin(beam_pitch), std::sin(yaw) * std::sin(beam_pitch), std::cos(beam_pitch)};
}

BeamGeometry::BeamGeometry(double beam_pitch) : pitch_(beam_pitch) {
  if (!(beam_pitch > 0.0 && beam_pitch < kPi / 2.0))
    throw DegenerateError("beam pitch must lie strictly between 0 and pi/2");
  for (int i = 1; i <= 4; ++i) h_.row(i - 1) = beam_direction(i, beam_pitch).transpose();
}

DvlErrorConfig DvlErrorConfig::error_free() {
  DvlErrorConfig c;
  c.scale = 0.0;
  c.bias.setZero();
  c.noise_std = 0.0;
  return c;
}

void DvlErrorConfig::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("dvl noise_std must be >= 0");
  if (!std::isfinite(scale) || !beam_scale.allFinite() || !bias.allFinite())
    throw ConfigError("dvl error terms must be finite");
}

ImuErrorConfig ImuErrorConfig::error_free() { return {}; }

ImuErrorConfig ImuErrorConfig::from_biases(double accel_bias_ug, double gyro_bias_deg_per_hour) {
  ImuErrorConfig c;
  c.accel_bias = Vector3::Constant(accel_bias_ug * kMicroG);
  c.gyro_bias = Vector3::Constant(gyro_bias_deg_per_hour * kDegPerHour);
  c.accel_noise_std = 0.01 * accel_bias_ug * kMicroG;
  c.gyro_noise_std = 0.01 * gyro_bias_deg_per_hour * kDegPerHour;
  return c;
}

void ImuErrorConfig::validate() const {
  if (!(accel_noise_std >= 0.0) || !(gyro_noise_std >= 0.0) || !std::isfinite(accel_noise_std) ||
      !std::isfinite(gyro_noise_std))
    throw ConfigError("imu noise stds must be >= 0");
  if (!accel_scale.allFinite() || !accel_bias.allFinite() || !gyro_scale.allFinite() ||
      !gyro_bias.allFinite())
    throw ConfigError("imu error terms must be finite");
}

BeamVelocities dvl_measure(const Vector3& v_d, const BeamGeometry& geom, const DvlErrorConfig& err,
                           Rng& rng) {
  const Vector4 projected = geom.h() * v_d;
  BeamVelocities y = (projected.array() * (1.0 + err.scale + err.beam_scale.array())).matrix() + err.bias;
  for (int i = 0; i < 4; ++i) y(i) += gaussian(rng, err.noise_std);
  return y;
}

Vector3 dvl_solve_ls(const BeamVelocities& y, const BeamGeometry& geom) {
  const BeamMatrix& h = geom.h();
  const Matrix3 hth = h.transpose() * h;
  Eigen::LDLT<Matrix3> ldlt(hth);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DegenerateError("dvl_solve_ls: beam geometry is rank deficient");
  return ldlt.solve(h.transpose() * y);
}

ImuMeasurement imu_measure(const Vector3& f_b, const Vector3& w_b, const ImuErrorConfig& err, Rng& rng) {
  ImuMeasurement m;
  m.f_b = err.accel_scale.cwiseProduct(f_b) + err.accel_bias;
  m.w_b = err.gyro_scale.cwiseProduct(w_b) + err.gyro_bias;
  for (int i = 0; i < 3; ++i) m.f_b(i) += gaussian(rng, err.accel_noise_std);
  for (int i = 0; i < 3; ++i) m.w_b(i) += gaussian(rng, err.gyro_noise_std);
  return m;
}

}  // namespace dvlalign
