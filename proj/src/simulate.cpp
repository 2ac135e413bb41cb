#include "dvlalign/simulate.hpp"

#include "dvlalign/errors.hpp"
#include "dvlalign/random.hpp"
#include "dvlalign/strapdown.hpp"

#include <cmath>

namespace dvlalign {

void SimulationConfig::validate() const {
  trajectory.validate();
  imu.validate();
  dvl.validate();
  if (!(beam_pitch > 0.0 && beam_pitch < kPi / 2.0)) throw ConfigError("beam_pitch must lie in (0, 90) deg");
  if (!(dvl_rate > 0.0)) throw ConfigError("dvl_rate must be positive");
  if (!(misalignment_deg.lo <= misalignment_deg.hi) || !std::isfinite(misalignment_deg.lo) ||
      !std::isfinite(misalignment_deg.hi))
    throw ConfigError("misalignment range must satisfy lo <= hi");
  try {
    sync_stride(trajectory.imu_rate, dvl_rate);
  } catch (const SyncError& e) {
    throw ConfigError(e.what());
  }
}

VelocityPairSeries TrajectoryRecord::pairs() const { return {t, v_b, v_d}; }

EulerAngles draw_misalignment(const Range& range_deg, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kMisalignment);
  auto draw = [&] { return range_deg.lo == range_deg.hi ? range_deg.lo : uniform(rng, range_deg.lo, range_deg.hi); };
  const double roll = draw();
  const double pitch = draw();
  const double yaw = draw();
  return EulerAngles::from_degrees(roll, pitch, yaw);
}

TrajectoryRecord simulate_record(const SimulationConfig& cfg, std::uint64_t seed, std::uint64_t index) {
  TrajectoryRecord rec;
  rec.index = index;
  rec.seed = seed;
  rec.trajectory = sample_trajectory_config(cfg.trajectory, seed);
  rec.label = draw_misalignment(cfg.misalignment_deg, seed);
  rec.dvl_rate = cfg.dvl_rate;

  const auto truth = generate_lawnmower(rec.trajectory);
  Rng imu_rng = make_rng(seed, Stream::kImuNoise);
  const InsRun ins = ins_body_velocity(truth, initial_state_from(truth.front()), cfg.imu, imu_rng);

  const std::size_t stride = sync_stride(rec.trajectory.imu_rate, cfg.dvl_rate);
  const BeamGeometry geom(cfg.beam_pitch);
  const RotationMatrix r_bd = euler_to_rotmat(rec.label);
  Rng dvl_rng = make_rng(seed, Stream::kDvlNoise);

  std::vector<DvlVelocitySample> dvl;
  for (std::size_t k = 0; k < truth.size(); k += stride) {
    const Vector3 vb_true = truth[k].r_nb.transpose() * truth[k].v_n;
    const Vector3 vd_true = r_bd * vb_true;
    const Vector3 vd = dvl_solve_ls(dvl_measure(vd_true, geom, cfg.dvl, dvl_rng), geom);
    dvl.push_back({truth[k].t, vd});
    rec.v_b_true.push_back(vb_true);
    rec.v_d_true.push_back(vd_true);
  }
  const VelocityPairSeries pairs = synchronize(ins.body_velocity, rec.trajectory.imu_rate, dvl, cfg.dvl_rate);
  rec.t = pairs.t;
  rec.v_b = pairs.v_b;
  rec.v_d = pairs.v_d;
  return rec;
}

}  // namespace dvlalign
