#pragma once

#include "dvlalign/frames.hpp"

#include <cstdint>
#include <vector>

namespace dvlalign {

inline constexpr double kGravity = 9.80665;

/// Gravity in NED, down-positive.
inline Vector3 gravity_ned() { return {0.0, 0.0, kGravity}; }

/// Kinematic lawn-mower survey: straight legs joined by alternating 180 degree
/// course reversals. Roll and pitch stay zero and depth is constant. Heading equals
/// course plus a sideslip angle, which builds up during turns and optionally
/// oscillates slowly (sway) along the whole track.
struct TrajectoryConfig {
  double duration = 230.0;        // s
  double imu_rate = 100.0;        // Hz
  double speed = 1.5;             // m/s
  double leg_length = 100.0;      // m
  double turn_rate = 9.0 * kDegToRad;  // rad/s, plateau course rate
  double turn_ramp = 2.0;         // s, raised-cosine entry and exit of the course rate
  double depth = 20.0;            // m
  double initial_heading = 0.0;   // rad, course of the first leg
  double leg_phase = 0.0;         // fraction of the first leg already travelled at t = 0
  int first_turn_direction = 1;   // +1 turns toward positive yaw, -1 the other way
  double turn_sideslip = 0.0;     // rad, peak sideslip reached mid-turn
  double sway_amplitude = 0.0;    // rad
  double sway_period = 20.0;      // s
  double sway_phase = 0.0;        // rad
  std::uint64_t seed = 0;

  /// Throws ConfigError on invalid values.
  void validate() const;
  std::size_t sample_count() const;
};

struct TrajectorySample {
  double t = 0.0;
  Vector3 p_n = Vector3::Zero();
  Vector3 v_n = Vector3::Zero();
  RotationMatrix r_nb = RotationMatrix::Identity();
  Vector3 f_b = Vector3::Zero();  // true specific force
  Vector3 w_b = Vector3::Zero();  // true angular rate
};

std::vector<TrajectorySample> generate_lawnmower(const TrajectoryConfig& cfg);

struct IntegrationDefect {
  double position = 0.0;  // max |dp/dt - (v_k + v_k+1)/2|, m/s
  double velocity = 0.0;  // max |dv/dt - (R f + g)_k|, m/s^2
};

/// Finite-difference audit of a sampled trajectory against its own kinematics.
/// Requires at least three samples.
IntegrationDefect integrate_check(const std::vector<TrajectorySample>& samples);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-trajectory randomization of the survey geometry.
struct TrajectoryRanges {
  double duration = 230.0;
  double imu_rate = 100.0;
  double depth = 20.0;
  double turn_ramp = 2.0;
  Range speed{1.0, 2.5};
  Range turn_rate{6.0 * kDegToRad, 12.0 * kDegToRad};
  Range leg_length{30.0, 100.0};
  Range initial_heading{0.0, 2.0 * kPi};
  Range leg_phase{0.0, 1.0};
  Range turn_sideslip{5.0 * kDegToRad, 15.0 * kDegToRad};
  Range sway_amplitude{0.2 * kDegToRad, 1.0 * kDegToRad};
  Range sway_period{10.0, 30.0};

  void validate() const;
};

/// Draws a config from the ranges using only `seed`.
TrajectoryConfig sample_trajectory_config(const TrajectoryRanges& ranges, std::uint64_t seed);

}  // namespace dvlalign
