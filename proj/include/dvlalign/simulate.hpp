#pragma once

#include "dvlalign/baseline.hpp"
#include "dvlalign/frames.hpp"
#include "dvlalign/sensors.hpp"
#include "dvlalign/trajgen.hpp"

#include <cstdint>
#include <vector>

namespace dvlalign {

/// Everything needed to turn a trajectory index into measurements.
struct SimulationConfig {
  TrajectoryRanges trajectory;
  ImuErrorConfig imu = ImuErrorConfig::from_biases(100.0, 1.0);
  DvlErrorConfig dvl;
  double beam_pitch = 20.0 * kDegToRad;
  double dvl_rate = 5.0;
  Range misalignment_deg{0.0, 45.0};  // per axis

  void validate() const;
};

/// One simulated trajectory reduced to DVL epochs.
struct TrajectoryRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  TrajectoryConfig trajectory;
  EulerAngles label;  // R_b^d
  double dvl_rate = 5.0;
  std::vector<double> t;
  std::vector<Vector3> v_b;       // INS body velocity
  std::vector<Vector3> v_d;       // DVL least-squares velocity
  std::vector<Vector3> v_b_true;  // R_nb^T v_n
  std::vector<Vector3> v_d_true;  // R_b^d v_b_true, before the beam error model

  std::size_t size() const { return t.size(); }
  VelocityPairSeries pairs() const;
};

/// Misalignment draw for a trajectory seed, uniform per axis.
EulerAngles draw_misalignment(const Range& range_deg, std::uint64_t seed);

/// Simulates trajectory `seed`: geometry, label and both sensor streams each come
/// from their own substream of the seed, so changing the IMU error model leaves the
/// trajectory, the label and the DVL noise unchanged.
TrajectoryRecord simulate_record(const SimulationConfig& cfg, std::uint64_t seed, std::uint64_t index);

}  // namespace dvlalign
