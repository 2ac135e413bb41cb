#include "dvlalign/frames.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace dvlalign {
namespace {

RotationMatrix axis_z(double a) {
  RotationMatrix r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

RotationMatrix random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = n(rng);
  Eigen::HouseholderQR<Matrix3> qr(m);
  Matrix3 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

TEST(Frames, IdentityAngles) {
  EXPECT_TRUE(euler_to_rotmat({0, 0, 0}).isApprox(Matrix3::Identity(), 0.0));
}

TEST(Frames, YawQuarterTurn) {
  Matrix3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((euler_to_rotmat({0, 0, kPi / 2}) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Frames, ComposesZYX) {
  const EulerAngles a{0.3, -0.2, 1.1};
  Matrix3 rx, ry;
  rx << 1, 0, 0, 0, std::cos(a.roll), -std::sin(a.roll), 0, std::sin(a.roll), std::cos(a.roll);
  ry << std::cos(a.pitch), 0, std::sin(a.pitch), 0, 1, 0, -std::sin(a.pitch), 0, std::cos(a.pitch);
  EXPECT_LT((euler_to_rotmat(a) - axis_z(a.yaw) * ry * rx).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Frames, RoundTripExampleAngles) {
  const auto a = EulerAngles::from_degrees(10, 5, -3);
  const auto back = rotmat_to_euler(euler_to_rotmat(a));
  EXPECT_FALSE(back.gimbal_lock);
  EXPECT_NEAR(back.angles.roll, a.roll, 1e-12);
  EXPECT_NEAR(back.angles.pitch, a.pitch, 1e-12);
  EXPECT_NEAR(back.angles.yaw, a.yaw, 1e-12);
}

TEST(Frames, InverseOfIdentityAndYaw) {
  const auto id = rotmat_to_euler(Matrix3::Identity()).angles;
  EXPECT_EQ(id.roll, 0.0);
  EXPECT_EQ(id.pitch, 0.0);
  EXPECT_EQ(id.yaw, 0.0);
  const auto z = rotmat_to_euler(axis_z(45 * kDegToRad)).angles;
  EXPECT_NEAR(z.roll, 0.0, 1e-15);
  EXPECT_NEAR(z.pitch, 0.0, 1e-15);
  EXPECT_NEAR(z.yaw, 45 * kDegToRad, 1e-15);
}

TEST(Frames, GimbalLockFoldsRollIntoYaw) {
  for (double pitch : {kPi / 2, -kPi / 2}) {
    const RotationMatrix r = euler_to_rotmat({0.4, pitch, 1.0});
    const auto d = rotmat_to_euler(r);
    EXPECT_TRUE(d.gimbal_lock);
    EXPECT_EQ(d.angles.roll, 0.0);
    EXPECT_LT((euler_to_rotmat(d.angles) - r).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Frames, PropertyAnglesRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi + 1e-9, kPi);
  std::uniform_real_distribution<double> pit(-89 * kDegToRad, 89 * kDegToRad);
  for (int i = 0; i < 2000; ++i) {
    const EulerAngles a{ang(rng), pit(rng), ang(rng)};
    const RotationMatrix r = euler_to_rotmat(a);
    EXPECT_LT(orthonormality_defect(r), 1e-12);
    const auto b = rotmat_to_euler(r).angles;
    EXPECT_NEAR(wrap_angle(b.roll - a.roll), 0.0, 1e-9);
    EXPECT_NEAR(b.pitch, a.pitch, 1e-9);
    EXPECT_NEAR(wrap_angle(b.yaw - a.yaw), 0.0, 1e-9);
  }
}

TEST(Frames, PropertyRandomRotationRoundTrip) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const RotationMatrix r = random_rotation(rng);
    const auto d = rotmat_to_euler(r);
    EXPECT_GE(d.angles.pitch, -kPi / 2);
    EXPECT_LE(d.angles.pitch, kPi / 2);
    EXPECT_GT(d.angles.roll, -kPi);
    EXPECT_GT(d.angles.yaw, -kPi);
    EXPECT_LT((euler_to_rotmat(d.angles) - r).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Frames, SkewMatchesCrossProduct) {
  EXPECT_TRUE(skew(Vector3::Zero()).isZero(0.0));
  EXPECT_EQ(skew({1, 0, 0}) * Vector3(0, 1, 0), Vector3(0, 0, 1));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 500; ++i) {
    const Vector3 w(n(rng), n(rng), n(rng)), v(n(rng), n(rng), n(rng));
    const Vector3 cross(w.y() * v.z() - w.z() * v.y(), w.z() * v.x() - w.x() * v.z(), w.x() * v.y() - w.y() * v.x());
    EXPECT_LT((skew(w) * v - cross).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE((skew(w) + skew(w).transpose()).isZero(0.0));
  }
}

TEST(Frames, RodriguesMatchesAxisRotation) {
  EXPECT_LT((rodrigues({0, 0, 0.7}) - axis_z(0.7)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((rodrigues({0, 0, 1e-6}) - axis_z(1e-6)).cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_LT(orthonormality_defect(rodrigues({0.3, -1.2, 2.0})), 1e-14);
}

TEST(Frames, OrthonormalizeProjectsNearbyMatrix) {
  Matrix3 m = euler_to_rotmat({0.1, 0.2, 0.3});
  m(0, 1) += 1e-6;
  const RotationMatrix r = orthonormalize(m);
  EXPECT_LT(orthonormality_defect(r), 1e-14);
  EXPECT_LT((r - m).norm(), 2e-6);
}

TEST(Frames, WrapAngle) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(359 * kDegToRad - 1 * kDegToRad), -2 * kDegToRad, 1e-14);
}

TEST(Frames, AngleRmseExamples) {
  const std::vector<EulerAngles> truth{EulerAngles::from_degrees(10, 20, 30), EulerAngles::from_degrees(1, 2, 3)};
  EXPECT_EQ(angle_rmse(truth, truth), 0.0);

  std::vector<EulerAngles> off;
  for (const auto& a : truth) off.push_back({a.roll + 3 * kDegToRad, a.pitch - 3 * kDegToRad, a.yaw + 3 * kDegToRad});
  EXPECT_NEAR(angle_rmse(truth, off), 3.0, 1e-12);

  const std::vector<EulerAngles> one{EulerAngles::from_degrees(4, 0, 0)};
  const std::vector<EulerAngles> zero{EulerAngles{}};
  EXPECT_NEAR(angle_rmse(one, zero), 4.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(angle_rmse(one, zero, RmseNormalization::kSummed), 4.0, 1e-12);
}

TEST(Frames, AngleRmseIgnoresFullTurns) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<EulerAngles> a, b, b_shift;
  for (int i = 0; i < 50; ++i) {
    a.push_back({u(rng), u(rng), u(rng)});
    b.push_back({u(rng), u(rng), u(rng)});
    b_shift.push_back({b.back().roll + 2 * kPi, b.back().pitch, b.back().yaw - 2 * kPi});
  }
  EXPECT_NEAR(angle_rmse(a, b), angle_rmse(a, b_shift), 1e-10);
}

TEST(Frames, AngleRmseRejectsBadInput) {
  const std::vector<EulerAngles> empty;
  EXPECT_THROW(angle_rmse(empty, empty), std::invalid_argument);
  const std::vector<EulerAngles> one(1), two(2);
  EXPECT_THROW(angle_rmse(one, two), std::invalid_argument);
}

}  // namespace
}  // namespace dvlalign
