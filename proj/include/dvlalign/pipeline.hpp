#pragma once

#include "dvlalign/alignnet.hpp"
#include "dvlalign/dataset.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dvlalign {

enum class Method { kSvdBaseline, kAlignNet };

/// "svd-baseline" / "alignnet".
std::string method_name(Method m);
/// Throws ConfigError for anything else.
Method method_from_name(const std::string& name);

inline const std::vector<double> kDefaultWindows{5.0, 25.0, 50.0, 75.0, 100.0};

struct WindowScore {
  double window_s = 0.0;
  double rmse_deg = 0.0;
  std::size_t n = 0;
  std::size_t degenerate = 0;  // baseline windows where Wahba was rank deficient; scored as identity
  double runtime_s = 0.0;
};

struct EvalReport {
  std::string method;
  std::string config_label;
  std::vector<WindowScore> windows;
};

/// Growing-window evaluation anchored at t = 0. AlignNet needs a checkpoint with
/// normalization stats (ConfigError otherwise). Throws std::invalid_argument for an
/// empty test set or a window longer than a record.
EvalReport evaluate(const std::vector<TrajectoryRecord>& test, Method method, const std::vector<double>& windows,
                    const Checkpoint* checkpoint = nullptr, unsigned workers = 0);

struct ImuCondition {
  std::string label;
  double accel_bias_ug = 0.0;
  double gyro_bias_deg_per_hour = 0.0;
};

/// 100 ug / 1 deg/h, 200 ug / 1 deg/h, 10 ug / 1 deg/h, 10 ug / 0.1 deg/h.
std::vector<ImuCondition> standard_imu_conditions();

/// Manifest simulation settings with the IMU biases (and their 1% white noise) replaced.
SimulationConfig with_imu_condition(SimulationConfig sim, const ImuCondition& c);

/// Re-simulates the given trajectories under each IMU condition (same trajectories,
/// labels and DVL noise) and evaluates the baseline, plus AlignNet when a checkpoint
/// is given. Reports come out condition-major, baseline before AlignNet.
std::vector<EvalReport> noise_sweep(const DatasetManifest& manifest, const std::vector<std::uint64_t>& indices,
                                    const Checkpoint* checkpoint, const std::vector<ImuCondition>& conditions,
                                    const std::vector<double>& windows, unsigned workers = 0);

/// `method,window_s,rmse_deg,n,runtime_s`. With include_runtime = false the runtime
/// column is written as 0 so reruns are byte-identical.
void write_eval_csv(std::ostream& os, const std::vector<EvalReport>& reports, bool include_runtime = true);
/// `config,method,window_s,rmse_deg,n,runtime_s`.
void write_sweep_csv(std::ostream& os, const std::vector<EvalReport>& reports, bool include_runtime = true);

struct TrainedModel {
  Checkpoint checkpoint;
  TrainResult result;
};

/// Standardizes with statistics pooled over the training windows, then trains.
TrainedModel train_on_records(const std::vector<TrajectoryRecord>& train_set,
                              const std::vector<TrajectoryRecord>& val_set, const ModelConfig& mcfg,
                              const TrainConfig& tcfg);

/// `epoch,train_loss,val_loss,lr`.
void write_loss_csv(std::ostream& os, const std::vector<EpochLog>& log);

}  // namespace dvlalign
