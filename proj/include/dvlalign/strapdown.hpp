#pragma once

#include "dvlalign/frames.hpp"
#include "dvlalign/random.hpp"
#include "dvlalign/sensors.hpp"
#include "dvlalign/trajgen.hpp"

#include <vector>

namespace dvlalign {

/// INS solution in a flat, non-rotating NED frame.
struct NavState {
  double t = 0.0;
  Vector3 p_n = Vector3::Zero();
  Vector3 v_n = Vector3::Zero();
  RotationMatrix r_nb = RotationMatrix::Identity();
};

/// One mechanization step over dt with interval-average specific force and rate.
/// Attitude via exact Rodrigues increment, velocity with the mid-interval attitude,
/// position trapezoidal in velocity, then re-orthonormalization.
NavState strapdown_step(const NavState& state, const Vector3& f_b, const Vector3& w_b, double dt);

struct BodyVelocitySample {
  double t = 0.0;
  Vector3 v_b = Vector3::Zero();
};

struct InsRun {
  std::vector<BodyVelocitySample> body_velocity;  // one per IMU epoch
  double max_orthonormality_defect = 0.0;
  NavState final_state;
};

/// Corrupts the ideal IMU stream with `err`, integrates it from `init`, and reports
/// R_nb^T v_n at every IMU epoch. Throws std::invalid_argument on an empty stream.
InsRun ins_body_velocity(const std::vector<TrajectorySample>& samples, const NavState& init,
                         const ImuErrorConfig& err, Rng& rng);

/// NavState matching the first ground-truth sample.
NavState initial_state_from(const TrajectorySample& s);

}  // namespace dvlalign
