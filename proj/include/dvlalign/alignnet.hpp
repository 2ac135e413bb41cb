#pragma once

#include "dvlalign/frames.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dvlalign {

inline constexpr int kInputChannels = 6;

/// Synchronized INS/DVL velocities, one row per DVL epoch:
/// columns vb_x, vb_y, vb_z, vd_x, vd_y, vd_z in m/s.
using WindowInput = Eigen::Matrix<double, Eigen::Dynamic, kInputChannels, Eigen::RowMajor>;

struct AlignmentWindow {
  WindowInput x;
  EulerAngles label;
};

struct ModelConfig {
  std::array<int, 3> channels{64, 128, 256};
  int kernel_size = 5;
  int fc_width = 512;
  int output_dim = 3;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct TensorShape {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// All weights and biases in one flat vector. Conv weights are stored as
/// [out_channels x (kernel_size * in_channels)] with column index k * in + c.
class ModelParams {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

  ModelParams() = default;
  explicit ModelParams(const ModelConfig& cfg);

  const ModelConfig& config() const { return config_; }
  const std::vector<TensorShape>& shapes() const { return shapes_; }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  std::size_t size() const { return static_cast<std::size_t>(flat_.size()); }

  // Tensor index: conv weight 2l, conv bias 2l+1 for l = 0..2, then fc1 w/b, fc2 w/b.
  MatrixMap tensor(std::size_t i);
  ConstMatrixMap tensor(std::size_t i) const;

 private:
  ModelConfig config_;
  std::vector<TensorShape> shapes_;
  Eigen::VectorXd flat_;
};

enum class InitScheme {
  kGlorotUniform,  // U(+-sqrt(6 / (fan_in + fan_out))), zero biases
  kNormal,         // N(0, std^2) on every parameter
};

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed, InitScheme scheme = InitScheme::kGlorotUniform,
                        double normal_std = 1e-2);

/// Conv(6->c0)+ReLU, Conv(c0->c1)+ReLU, Conv(c1->c2)+ReLU with same padding,
/// global average pool over time, FC(c2->fc)+ReLU, FC(fc->3). Input is expected to be
/// standardized already. Throws std::invalid_argument when the window is shorter
/// than the kernel.
Eigen::Vector3d forward(const ModelParams& params, const WindowInput& x);
std::vector<Eigen::Vector3d> forward(const ModelParams& params, std::span<const WindowInput> batch);

/// Mean over the batch of the per-sample sum of squared angle errors, rad^2.
double mse_loss(std::span<const Eigen::Vector3d> pred, std::span<const EulerAngles> truth);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Exact gradient of mse_loss(forward(params, x), labels) over all parameters.
LossAndGradient backward(const ModelParams& params, std::span<const WindowInput> batch,
                         std::span<const EulerAngles> labels);

/// Per-channel standardization statistics.
struct NormStats {
  std::array<double, kInputChannels> mean{};
  std::array<double, kInputChannels> std{};

  WindowInput apply(const WindowInput& x) const;
  /// Pooled over every row of every window; a zero std is replaced by one.
  static NormStats from_windows(std::span<const WindowInput> windows);
};

/// Standardizes, runs the network, and reads the outputs as (roll, pitch, yaw).
/// Throws std::invalid_argument when stats are absent.
EulerAngles predict_alignment(const ModelParams& params, const WindowInput& window,
                              const std::optional<NormStats>& stats);

struct TrainConfig {
  double learning_rate = 1e-7;
  int batch_size = 32;
  int early_stop_patience = 15;
  double lr_decay_factor = 0.5;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  /// Window lengths in DVL epochs; each training sample draws one per epoch.
  std::vector<int> window_choices{25, 125, 250, 375, 500};
  double min_improvement = 1e-8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  /// Epochs without improvement before the learning rate is decayed.
  int plateau_epochs() const { return (early_stop_patience + 2) / 3; }
  /// Stable hash of the fields above.
  std::string fingerprint() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  ModelParams params;  // best validation loss
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Adam training with plateau decay and early stopping. Windows must already be
/// standardized and hold at least the longest window choice (shorter ones are used
/// whole). Validation windows use fixed lengths cycling through the choices.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(std::span<const AlignmentWindow> train_set, std::span<const AlignmentWindow> val_set,
                  const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const std::optional<ModelParams>& initial = std::nullopt);

/// Mean validation loss with fixed per-sample window lengths.
double evaluate_loss(const ModelParams& params, std::span<const AlignmentWindow> set, std::span<const int> lengths);

struct Checkpoint {
  ModelParams params;
  std::optional<NormStats> norm;
  std::string train_fingerprint;
};

inline constexpr int kCheckpointVersion = 1;

/// Binary layout: the line "DVLALIGN-CHECKPOINT", one line of JSON (format version,
/// model config, normalization stats, shape table, fingerprint, parameter count),
/// then the parameters as little-endian float64. Throws IoError.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dvlalign
