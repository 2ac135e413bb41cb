#include "dvlalign/errors.hpp"
#include "dvlalign/sensors.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace dvlalign {
namespace {

// Explicit adjugate inverse, independent of the Eigen solvers used in the library.
Matrix3 inverse_by_adjugate(const Matrix3& m) {
  Matrix3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  return adj / det;
}

TEST(Sensors, BeamDirectionExample) {
  const Vector3 b1 = beam_direction(1, 20 * kDegToRad);
  EXPECT_NEAR(b1.x(), 0.2418, 1e-4);
  EXPECT_NEAR(b1.y(), 0.2418, 1e-4);
  EXPECT_NEAR(b1.z(), 0.9397, 1e-4);
  for (int i = 1; i <= 4; ++i) EXPECT_NEAR(beam_direction(i, 0.7).norm(), 1.0, 1e-15);
}

TEST(Sensors, BeamYaws) {
  EXPECT_DOUBLE_EQ(BeamGeometry::beam_yaw(1) * kRadToDeg, 45.0);
  EXPECT_DOUBLE_EQ(BeamGeometry::beam_yaw(2) * kRadToDeg, 135.0);
  EXPECT_DOUBLE_EQ(BeamGeometry::beam_yaw(3) * kRadToDeg, 225.0);
  EXPECT_DOUBLE_EQ(BeamGeometry::beam_yaw(4) * kRadToDeg, 315.0);
  EXPECT_THROW(beam_direction(0, 0.3), std::out_of_range);
  EXPECT_THROW(beam_direction(5, 0.3), std::out_of_range);
}

TEST(Sensors, ZeroPitchLimitPointsDown) {
  for (int i = 1; i <= 4; ++i) EXPECT_LT((beam_direction(i, 1e-12) - Vector3(0, 0, 1)).norm(), 1e-11);
}

TEST(Sensors, JanusNormalMatrixIsDiagonal) {
  for (double deg : {5.0, 20.0, 30.0, 60.0, 85.0}) {
    const double a = deg * kDegToRad;
    const BeamGeometry g(a);
    Matrix3 expected = Matrix3::Zero();
    expected.diagonal() << 2 * std::sin(a) * std::sin(a), 2 * std::sin(a) * std::sin(a), 4 * std::cos(a) * std::cos(a);
    EXPECT_LT((g.h().transpose() * g.h() - expected).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(g.h().row(i).norm(), 1.0, 1e-15);
  }
}

TEST(Sensors, RankDeficientGeometryRejected) {
  EXPECT_THROW(BeamGeometry(0.0), DegenerateError);
  EXPECT_THROW(BeamGeometry(kPi / 2), DegenerateError);
}

TEST(Sensors, ErrorFreeMeasurementIsProjection) {
  const BeamGeometry g(20 * kDegToRad);
  Rng rng(1);
  const Vector4 y = dvl_measure({1, 0, 0}, g, DvlErrorConfig::error_free(), rng);
  EXPECT_NEAR(y(0), 0.2418, 1e-4);
  EXPECT_NEAR(y(1), -0.2418, 1e-4);
  EXPECT_NEAR(y(2), -0.2418, 1e-4);
  EXPECT_NEAR(y(3), 0.2418, 1e-4);
  const Vector3 v(0.3, -1.2, 0.4);
  EXPECT_EQ(dvl_measure(v, g, DvlErrorConfig::error_free(), rng), Vector4(g.h() * v));
}

TEST(Sensors, ScaleOnlyMeasurement) {
  const BeamGeometry g(20 * kDegToRad);
  Rng rng(1);
  DvlErrorConfig err = DvlErrorConfig::error_free();
  err.scale = 0.007;
  const Vector4 clean = g.h() * Vector3(1, 0, 0);
  const Vector4 y = dvl_measure({1, 0, 0}, g, err, rng);
  EXPECT_LT((y - 1.007 * clean).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sensors, LeastSquaresRecoversConsistentVelocity) {
  Rng rng(4);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> pitch(5 * kDegToRad, 85 * kDegToRad);
  for (int i = 0; i < 1000; ++i) {
    const BeamGeometry g(pitch(rng));
    const Vector3 v(n(rng), n(rng), n(rng));
    const Vector3 est = dvl_solve_ls(dvl_measure(v, g, DvlErrorConfig::error_free(), rng), g);
    EXPECT_LT((est - v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Sensors, LeastSquaresMatchesNormalEquationOracle) {
  Rng rng(5);
  std::normal_distribution<double> n;
  const BeamGeometry g(20 * kDegToRad);
  const Matrix3 hth_inv = inverse_by_adjugate(g.h().transpose() * g.h());
  for (int i = 0; i < 1000; ++i) {
    const Vector4 y(n(rng), n(rng), n(rng), n(rng));
    const Vector3 oracle = hth_inv * (g.h().transpose() * y);
    EXPECT_LT((dvl_solve_ls(y, g) - oracle).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Sensors, CommonBeamBiasMapsToVerticalAxis) {
  const double a = 20 * kDegToRad;
  const BeamGeometry g(a);
  const Vector3 v(1.1, -0.4, 0.2);
  const double b = 0.01;
  const Vector3 err = dvl_solve_ls(g.h() * v + Vector4::Constant(b), g) - v;
  EXPECT_NEAR(err.x(), 0.0, 1e-15);
  EXPECT_NEAR(err.y(), 0.0, 1e-15);
  EXPECT_NEAR(err.z(), b / std::cos(a), 1e-15);
}

TEST(Sensors, WhiteNoiseLeastSquaresIsUnbiased) {
  const BeamGeometry g(20 * kDegToRad);
  DvlErrorConfig err = DvlErrorConfig::error_free();
  err.noise_std = 0.02;
  const Vector3 v(1.3, -0.7, 0.1);
  Rng rng(6);
  const int reps = 100000;
  Vector3 sum = Vector3::Zero();
  for (int i = 0; i < reps; ++i) sum += dvl_solve_ls(dvl_measure(v, g, err, rng), g);
  const Eigen::Matrix<double, 3, 4> pinv = (g.h().transpose() * g.h()).inverse() * g.h().transpose();
  const double op_norm = Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>>(pinv).singularValues()(0);
  const double bound = 3.0 * err.noise_std / std::sqrt(static_cast<double>(reps)) * op_norm;
  EXPECT_LT(((sum / reps) - v).cwiseAbs().maxCoeff(), bound);
}

TEST(Sensors, SeededStreamsReproduce) {
  const BeamGeometry g(20 * kDegToRad);
  const DvlErrorConfig dvl;
  const ImuErrorConfig imu = ImuErrorConfig::from_biases(100, 1);
  Rng a = make_rng(9, Stream::kDvlNoise), b = make_rng(9, Stream::kDvlNoise);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(dvl_measure({1, 2, 3}, g, dvl, a), dvl_measure({1, 2, 3}, g, dvl, b));
  Rng c = make_rng(9, Stream::kImuNoise), d = make_rng(9, Stream::kImuNoise);
  for (int i = 0; i < 100; ++i) {
    const auto m1 = imu_measure({0, 0, -9.8}, {0, 0, 0.1}, imu, c);
    const auto m2 = imu_measure({0, 0, -9.8}, {0, 0, 0.1}, imu, d);
    EXPECT_EQ(m1.f_b, m2.f_b);
    EXPECT_EQ(m1.w_b, m2.w_b);
  }
}

TEST(Sensors, ImuErrorFreeIsTruth) {
  Rng rng(2);
  const Vector3 f(0.1, -0.2, -9.8), w(0.01, 0.02, -0.03);
  const auto m = imu_measure(f, w, ImuErrorConfig::error_free(), rng);
  EXPECT_EQ(m.f_b, f);
  EXPECT_EQ(m.w_b, w);
}

TEST(Sensors, ImuBiasOnly) {
  Rng rng(2);
  ImuErrorConfig err;
  err.accel_bias = Vector3::Constant(100 * kMicroG);
  err.gyro_bias = Vector3::Constant(1 * kDegPerHour);
  const auto m = imu_measure(Vector3::Zero(), Vector3::Zero(), err, rng);
  EXPECT_NEAR(m.f_b.x(), 9.80665e-4, 1e-18);
  EXPECT_EQ(m.f_b, Vector3::Constant(100 * kMicroG));
  EXPECT_NEAR(m.w_b.x(), 4.848e-6, 1e-9);
  EXPECT_EQ(m.w_b, Vector3::Constant(1 * kDegPerHour));
}

TEST(Sensors, ImuScaleFactor) {
  Rng rng(2);
  ImuErrorConfig err;
  err.accel_scale = Vector3(1.001, 0.999, 1.0);
  err.gyro_scale = Vector3(1.0, 1.0, 1.01);
  const auto m = imu_measure({1, 1, 1}, {1, 1, 1}, err, rng);
  EXPECT_EQ(m.f_b, Vector3(1.001, 0.999, 1.0));
  EXPECT_EQ(m.w_b, Vector3(1.0, 1.0, 1.01));
}

TEST(Sensors, FromBiasesNoiseTwoOrdersBelow) {
  const auto c = ImuErrorConfig::from_biases(100, 1);
  EXPECT_NEAR(c.accel_noise_std, 1 * kMicroG, 1e-20);
  EXPECT_NEAR(c.gyro_noise_std, 0.01 * kDegPerHour, 1e-20);
  ImuErrorConfig bad;
  bad.gyro_noise_std = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace dvlalign
