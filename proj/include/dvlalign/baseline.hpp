#pragma once

#include "dvlalign/frames.hpp"
#include "dvlalign/strapdown.hpp"

#include <span>
#include <vector>

namespace dvlalign {

struct DvlVelocitySample {
  double t = 0.0;
  Vector3 v_d = Vector3::Zero();
};

/// INS body-frame and DVL-frame velocities paired at DVL epochs.
struct VelocityPairSeries {
  std::vector<double> t;
  std::vector<Vector3> v_b;
  std::vector<Vector3> v_d;

  std::size_t size() const { return t.size(); }
  /// The leading `count` pairs.
  VelocityPairSeries head(std::size_t count) const;
};

/// Paired timestamps must agree to this many seconds.
inline constexpr double kSyncTolerance = 1e-6;

/// Picks the INS epoch coinciding with each DVL epoch (no interpolation). Both streams
/// must be uniformly sampled from a common start; throws SyncError when the rate ratio
/// is not an integer or a paired timestamp differs by more than kSyncTolerance.
VelocityPairSeries synchronize(std::span<const BodyVelocitySample> ins, double ins_rate,
                               std::span<const DvlVelocitySample> dvl, double dvl_rate);

/// Integer INS-to-DVL decimation factor; throws SyncError if not integral.
std::size_t sync_stride(double ins_rate, double dvl_rate);

/// Solution of min_R sum |v_d - R v_b|^2 over proper rotations via SVD of
/// B = sum v_d v_b^T. Throws DegenerateError when fewer than two pairs are given or
/// B has rank below two.
RotationMatrix wahba_svd(std::span<const Vector3> v_b, std::span<const Vector3> v_d);
RotationMatrix wahba_svd(const VelocityPairSeries& pairs);

/// sum |v_d - R v_b|^2
double wahba_cost(const RotationMatrix& r, std::span<const Vector3> v_b, std::span<const Vector3> v_d);

/// Smallest-to-largest singular value ratio below which B counts as rank deficient.
inline constexpr double kWahbaRankTolerance = 1e-9;

/// Number of pairs covering the leading `window_s` seconds at `dvl_rate`.
std::size_t window_epochs(double window_s, double dvl_rate);

/// Wahba solution on the leading window of a paired series.
EulerAngles baseline_align(const VelocityPairSeries& pairs, double window_s, double dvl_rate);

}  // namespace dvlalign
