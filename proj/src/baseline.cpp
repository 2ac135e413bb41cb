#include "dvlalign/baseline.hpp"

#include "dvlalign/errors.hpp"

#include <cmath>
#include <string>

namespace dvlalign {

VelocityPairSeries VelocityPairSeries::head(std::size_t count) const {
  count = std::min(count, size());
  VelocityPairSeries out;
  out.t.assign(t.begin(), t.begin() + count);
  out.v_b.assign(v_b.begin(), v_b.begin() + count);
  out.v_d.assign(v_d.begin(), v_d.begin() + count);
  return out;
}

std::size_t sync_stride(double ins_rate, double dvl_rate) {
  if (!(ins_rate > 0.0) || !(dvl_rate > 0.0)) throw SyncError("rates must be positive");
  const double ratio = ins_rate / dvl_rate;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
    throw SyncError("ins rate " + std::to_string(ins_rate) + " Hz is not an integer multiple of dvl rate " +
                    std::to_string(dvl_rate) + " Hz");
  return static_cast<std::size_t>(rounded);
}

VelocityPairSeries synchronize(std::span<const BodyVelocitySample> ins, double ins_rate,
                               std::span<const DvlVelocitySample> dvl, double dvl_rate) {
  const std::size_t stride = sync_stride(ins_rate, dvl_rate);
  VelocityPairSeries out;
  out.t.reserve(dvl.size());
  out.v_b.reserve(dvl.size());
  out.v_d.reserve(dvl.size());
  for (std::size_t j = 0; j < dvl.size(); ++j) {
    const std::size_t k = j * stride;
    if (k >= ins.size()) throw SyncError("dvl stream extends past the ins stream");
    if (std::abs(ins[k].t - dvl[j].t) > kSyncTolerance)
      throw SyncError("timestamp mismatch at dvl epoch " + std::to_string(j));
    out.t.push_back(dvl[j].t);
    out.v_b.push_back(ins[k].v_b);
    out.v_d.push_back(dvl[j].v_d);
  }
  return out;
}

RotationMatrix wahba_svd(std::span<const Vector3> v_b, std::span<const Vector3> v_d) {
  if (v_b.size() != v_d.size()) throw std::invalid_argument("wahba_svd: length mismatch");
  if (v_b.size() < 2) throw DegenerateError("wahba_svd: need at least two pairs");
  Matrix3 b = Matrix3::Zero();
  for (std::size_t k = 0; k < v_b.size(); ++k) b += v_d[k] * v_b[k].transpose();

  Eigen::JacobiSVD<Matrix3> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= kWahbaRankTolerance * sv(0))
    throw DegenerateError("wahba_svd: velocity profile is collinear (rank(B) < 2)");
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (u * v.transpose()).determinant();
  return u * d * v.transpose();
}

RotationMatrix wahba_svd(const VelocityPairSeries& pairs) { return wahba_svd(pairs.v_b, pairs.v_d); }

double wahba_cost(const RotationMatrix& r, std::span<const Vector3> v_b, std::span<const Vector3> v_d) {
  double cost = 0.0;
  for (std::size_t k = 0; k < v_b.size(); ++k) cost += (v_d[k] - r * v_b[k]).squaredNorm();
  return cost;
}

std::size_t window_epochs(double window_s, double dvl_rate) {
  return static_cast<std::size_t>(std::llround(window_s * dvl_rate));
}

EulerAngles baseline_align(const VelocityPairSeries& pairs, double window_s, double dvl_rate) {
  const std::size_t n = window_epochs(window_s, dvl_rate);
  if (n > pairs.size()) throw std::invalid_argument("baseline_align: window longer than the series");
  const std::span<const Vector3> vb(pairs.v_b.data(), n);
  const std::span<const Vector3> vd(pairs.v_d.data(), n);
  return rotmat_to_euler(wahba_svd(vb, vd)).angles;
}

}  // namespace dvlalign
