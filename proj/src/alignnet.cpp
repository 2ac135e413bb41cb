#include "dvlalign/alignnet.hpp"

#include "dvlalign/binary_io.hpp"
#include "dvlalign/errors.hpp"
#include "dvlalign/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dvlalign {

namespace {

constexpr std::size_t kConvLayers = 3;
constexpr std::size_t kTensorCount = 2 * kConvLayers + 4;
constexpr std::size_t kFc1 = 2 * kConvLayers;
constexpr std::size_t kFc2 = kFc1 + 2;

using Eigen::MatrixXd;
using Eigen::VectorXd;

int conv_in_channels(const ModelConfig& cfg, std::size_t layer) {
  return layer == 0 ? kInputChannels : cfg.channels[layer - 1];
}

// col(k * C + c, t) = in(c, t + k - pad), zero outside the window.
void im2col(const MatrixXd& in, int kernel, MatrixXd& col) {
  const Eigen::Index channels = in.rows();
  const Eigen::Index len = in.cols();
  const int pad = kernel / 2;
  col.setZero(channels * kernel, len);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = k - pad;
    const Eigen::Index dst0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index dst1 = std::min<Eigen::Index>(len, len - shift);
    if (dst1 <= dst0) continue;
    col.block(k * channels, dst0, channels, dst1 - dst0) = in.block(0, dst0 + shift, channels, dst1 - dst0);
  }
}

void col2im_add(const MatrixXd& col, int kernel, MatrixXd& in_grad) {
  const Eigen::Index channels = in_grad.rows();
  const Eigen::Index len = in_grad.cols();
  const int pad = kernel / 2;
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = k - pad;
    const Eigen::Index dst0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index dst1 = std::min<Eigen::Index>(len, len - shift);
    if (dst1 <= dst0) continue;
    in_grad.block(0, dst0 + shift, channels, dst1 - dst0) += col.block(k * channels, dst0, channels, dst1 - dst0);
  }
}

struct ForwardCache {
  std::array<MatrixXd, kConvLayers> cols;         // im2col of each conv input
  std::array<MatrixXd, kConvLayers> activations;  // post-ReLU conv outputs
  VectorXd pooled;
  VectorXd hidden;  // post-ReLU fc1
  Eigen::Vector3d out;
};

void run_forward(const ModelParams& p, const WindowInput& x, ForwardCache& c) {
  const ModelConfig& cfg = p.config();
  if (x.rows() < cfg.kernel_size)
    throw std::invalid_argument("alignnet: window of " + std::to_string(x.rows()) +
                                " epochs is shorter than the kernel (" + std::to_string(cfg.kernel_size) + ")");
  MatrixXd input = x.transpose();
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const MatrixXd& in = l == 0 ? input : c.activations[l - 1];
    im2col(in, cfg.kernel_size, c.cols[l]);
    MatrixXd& a = c.activations[l];
    a.noalias() = p.tensor(2 * l) * c.cols[l];
    a.colwise() += p.tensor(2 * l + 1).col(0);
    a = a.cwiseMax(0.0);
  }
  c.pooled = c.activations[kConvLayers - 1].rowwise().mean();
  c.hidden = (p.tensor(kFc1) * c.pooled + p.tensor(kFc1 + 1).col(0)).cwiseMax(0.0);
  c.out = p.tensor(kFc2) * c.hidden + p.tensor(kFc2 + 1).col(0);
}

// Accumulates d(out)/d(params) contracted with dout into grad.
void run_backward(const ModelParams& p, const ForwardCache& c, const Eigen::Vector3d& dout, ModelParams& grad) {
  const ModelConfig& cfg = p.config();
  grad.tensor(kFc2).noalias() += dout * c.hidden.transpose();
  grad.tensor(kFc2 + 1).col(0) += dout;
  VectorXd dhidden = p.tensor(kFc2).transpose() * dout;
  dhidden = (c.hidden.array() > 0.0).select(dhidden, 0.0);
  grad.tensor(kFc1).noalias() += dhidden * c.pooled.transpose();
  grad.tensor(kFc1 + 1).col(0) += dhidden;
  const VectorXd dpooled = p.tensor(kFc1).transpose() * dhidden;

  const MatrixXd& last = c.activations[kConvLayers - 1];
  MatrixXd da = (dpooled / static_cast<double>(last.cols())).replicate(1, last.cols());
  for (std::size_t li = kConvLayers; li-- > 0;) {
    const MatrixXd& a = c.activations[li];
    MatrixXd dz = (a.array() > 0.0).select(da, 0.0);
    grad.tensor(2 * li).noalias() += dz * c.cols[li].transpose();
    grad.tensor(2 * li + 1).col(0) += dz.rowwise().sum();
    if (li == 0) break;
    MatrixXd dcol;
    dcol.noalias() = p.tensor(2 * li).transpose() * dz;
    da.setZero(conv_in_channels(cfg, li), a.cols());
    col2im_add(dcol, cfg.kernel_size, da);
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void ModelConfig::validate() const {
  if (output_dim != 3) throw ConfigError("alignnet: output_dim must be 3");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("alignnet: kernel_size must be odd and positive");
  for (int ch : channels)
    if (ch < 1) throw ConfigError("alignnet: channel counts must be positive");
  if (fc_width < 1) throw ConfigError("alignnet: fc_width must be positive");
}

ModelParams::ModelParams(const ModelConfig& cfg) : config_(cfg) {
  cfg.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    shapes_.push_back({std::move(name), rows, cols, offset});
    offset += shapes_.back().size();
  };
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const int in = conv_in_channels(cfg, l);
    add("conv" + std::to_string(l + 1) + ".weight", cfg.channels[l], cfg.kernel_size * in);
    add("conv" + std::to_string(l + 1) + ".bias", cfg.channels[l], 1);
  }
  add("fc1.weight", cfg.fc_width, cfg.channels[kConvLayers - 1]);
  add("fc1.bias", cfg.fc_width, 1);
  add("fc2.weight", cfg.output_dim, cfg.fc_width);
  add("fc2.bias", cfg.output_dim, 1);
  flat_ = VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

ModelParams::MatrixMap ModelParams::tensor(std::size_t i) {
  const TensorShape& s = shapes_.at(i);
  return MatrixMap(flat_.data() + s.offset, s.rows, s.cols);
}

ModelParams::ConstMatrixMap ModelParams::tensor(std::size_t i) const {
  const TensorShape& s = shapes_.at(i);
  return ConstMatrixMap(flat_.data() + s.offset, s.rows, s.cols);
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed, InitScheme scheme, double normal_std) {
  ModelParams p(cfg);
  Rng rng = make_rng(seed, Stream::kInit);
  if (scheme == InitScheme::kNormal) {
    std::normal_distribution<double> dist(0.0, normal_std);
    for (Eigen::Index i = 0; i < p.flat().size(); ++i) p.flat()(i) = dist(rng);
    return p;
  }
  for (std::size_t i = 0; i < kTensorCount; i += 2) {
    auto w = p.tensor(i);
    double fan_in = static_cast<double>(w.cols());
    double fan_out = static_cast<double>(w.rows());
    if (i < kFc1) fan_out *= cfg.kernel_size;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = dist(rng);
  }
  return p;
}

Eigen::Vector3d forward(const ModelParams& params, const WindowInput& x) {
  ForwardCache cache;
  run_forward(params, x, cache);
  return cache.out;
}

std::vector<Eigen::Vector3d> forward(const ModelParams& params, std::span<const WindowInput> batch) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(batch.size());
  ForwardCache cache;
  for (const auto& x : batch) {
    run_forward(params, x, cache);
    out.push_back(cache.out);
  }
  return out;
}

double mse_loss(std::span<const Eigen::Vector3d> pred, std::span<const EulerAngles> truth) {
  if (pred.empty()) throw std::invalid_argument("mse_loss: empty batch");
  if (pred.size() != truth.size()) throw std::invalid_argument("mse_loss: batch size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i].as_vector()).squaredNorm();
  return sum / static_cast<double>(pred.size());
}

LossAndGradient backward(const ModelParams& params, std::span<const WindowInput> batch,
                         std::span<const EulerAngles> labels) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  if (batch.size() != labels.size()) throw std::invalid_argument("backward: batch size mismatch");
  ModelParams grad(params.config());
  ForwardCache cache;
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    run_forward(params, batch[i], cache);
    const Eigen::Vector3d residual = cache.out - labels[i].as_vector();
    loss += residual.squaredNorm();
    run_backward(params, cache, 2.0 * residual / n, grad);
  }
  return {loss / n, std::move(grad.flat())};
}

WindowInput NormStats::apply(const WindowInput& x) const {
  WindowInput out(x.rows(), kInputChannels);
  for (int c = 0; c < kInputChannels; ++c) out.col(c) = (x.col(c).array() - mean[c]) / std[c];
  return out;
}

NormStats NormStats::from_windows(std::span<const WindowInput> windows) {
  NormStats s;
  std::array<double, kInputChannels> sum{}, sq{};
  double count = 0.0;
  for (const auto& w : windows) {
    for (int c = 0; c < kInputChannels; ++c) sum[c] += w.col(c).sum();
    count += static_cast<double>(w.rows());
  }
  if (count == 0.0) throw std::invalid_argument("NormStats: no data");
  for (int c = 0; c < kInputChannels; ++c) s.mean[c] = sum[c] / count;
  for (const auto& w : windows)
    for (int c = 0; c < kInputChannels; ++c) sq[c] += (w.col(c).array() - s.mean[c]).square().sum();
  for (int c = 0; c < kInputChannels; ++c) {
    const double sd = std::sqrt(sq[c] / count);
    s.std[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

EulerAngles predict_alignment(const ModelParams& params, const WindowInput& window,
                              const std::optional<NormStats>& stats) {
  if (!stats) throw std::invalid_argument("predict_alignment: normalization stats missing");
  const Eigen::Vector3d out = forward(params, stats->apply(window));
  return {out(0), out(1), out(2)};
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train: learning_rate must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (early_stop_patience < 1) throw ConfigError("train: early_stop_patience must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) throw ConfigError("train: lr_decay_factor must lie in (0, 1)");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (window_choices.empty()) throw ConfigError("train: window_choices must not be empty");
  for (int w : window_choices)
    if (w < 1) throw ConfigError("train: window lengths must be positive");
}

std::string TrainConfig::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "lr=" << learning_rate << ";batch=" << batch_size << ";patience=" << early_stop_patience
     << ";decay=" << lr_decay_factor << ";max_epochs=" << max_epochs << ";seed=" << seed << ";windows=";
  for (int w : window_choices) os << w << ',';
  os << ";min_improvement=" << min_improvement << ";adam=" << adam_beta1 << ',' << adam_beta2 << ','
     << adam_epsilon;
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

double evaluate_loss(const ModelParams& params, std::span<const AlignmentWindow> set, std::span<const int> lengths) {
  if (set.empty()) throw std::invalid_argument("evaluate_loss: empty set");
  ForwardCache cache;
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto len = std::min<Eigen::Index>(lengths[i % lengths.size()], set[i].x.rows());
    run_forward(params, set[i].x.topRows(len), cache);
    sum += (cache.out - set[i].label.as_vector()).squaredNorm();
  }
  return sum / static_cast<double>(set.size());
}

TrainResult train(std::span<const AlignmentWindow> train_set, std::span<const AlignmentWindow> val_set,
                  const ModelConfig& mcfg, const TrainConfig& tcfg, const std::optional<ModelParams>& initial) {
  mcfg.validate();
  tcfg.validate();
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train: empty split");

  TrainResult result;
  ModelParams params = initial ? *initial : init_params(mcfg, tcfg.seed);
  if (!(params.config() == mcfg)) throw ConfigError("train: initial parameters do not match the model config");
  Rng rng = make_rng(tcfg.seed, Stream::kShuffle);

  VectorXd m = VectorXd::Zero(params.flat().size());
  VectorXd v = VectorXd::Zero(params.flat().size());
  double lr = tcfg.learning_rate;
  long step = 0;

  result.params = params;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int since_decay = 0;

  std::vector<std::size_t> order(train_set.size());
  std::vector<WindowInput> batch_x;
  std::vector<EulerAngles> batch_y;
  std::uniform_int_distribution<std::size_t> pick(0, tcfg.window_choices.size() - 1);

  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        const AlignmentWindow& w = train_set[order[i]];
        const auto len = std::min<Eigen::Index>(tcfg.window_choices[pick(rng)], w.x.rows());
        batch_x.emplace_back(w.x.topRows(len));
        batch_y.push_back(w.label);
      }
      LossAndGradient lg = backward(params, batch_x, batch_y);
      if (!std::isfinite(lg.loss))
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
      train_sum += lg.loss * static_cast<double>(end - start);

      ++step;
      const double b1 = tcfg.adam_beta1, b2 = tcfg.adam_beta2;
      m = b1 * m + (1.0 - b1) * lg.gradient;
      v = b2 * v + (1.0 - b2) * lg.gradient.cwiseAbs2();
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      params.flat().array() -=
          lr * (m.array() / c1) / ((v.array() / c2).sqrt() + tcfg.adam_epsilon);
    }

    const double val = evaluate_loss(params, val_set, tcfg.window_choices);
    if (!std::isfinite(val))
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ": non-finite validation loss");
    result.log.push_back({epoch, train_sum / static_cast<double>(order.size()), val, lr});

    if (val < result.best_val_loss - tcfg.min_improvement) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
      since_decay = 0;
    } else {
      ++since_best;
      ++since_decay;
      if (since_best >= tcfg.early_stop_patience) break;
      if (since_decay >= tcfg.plateau_epochs()) {
        lr *= tcfg.lr_decay_factor;
        since_decay = 0;
      }
    }
  }
  return result;
}

namespace {

constexpr const char* kCheckpointMagic = "DVLALIGN-CHECKPOINT";

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const ModelConfig& cfg = ckpt.params.config();
  nlohmann::json header;
  header["format_version"] = kCheckpointVersion;
  header["model"] = {{"channels", cfg.channels},
                     {"kernel_size", cfg.kernel_size},
                     {"fc_width", cfg.fc_width},
                     {"output_dim", cfg.output_dim}};
  if (ckpt.norm) header["normalization"] = {{"mean", ckpt.norm->mean}, {"std", ckpt.norm->std}};
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& s : ckpt.params.shapes())
    shapes.push_back({{"name", s.name}, {"shape", {s.rows, s.cols}}, {"offset", s.offset}});
  header["tensors"] = shapes;
  header["param_count"] = ckpt.params.size();
  header["dtype"] = "float64-le";
  header["train_fingerprint"] = ckpt.train_fingerprint;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os << kCheckpointMagic << '\n' << header.dump() << '\n';
  write_le_doubles(os, {ckpt.params.flat().data(), ckpt.params.size()});
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  std::string magic, header_line;
  std::getline(is, magic);
  if (magic != kCheckpointMagic) throw IoError("not a checkpoint file: " + path);
  std::getline(is, header_line);
  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(header_line);
    if (header.at("format_version").get<int>() != kCheckpointVersion)
      throw IoError("unsupported checkpoint version in " + path);
    ModelConfig cfg;
    cfg.channels = header.at("model").at("channels").get<std::array<int, 3>>();
    cfg.kernel_size = header.at("model").at("kernel_size").get<int>();
    cfg.fc_width = header.at("model").at("fc_width").get<int>();
    cfg.output_dim = header.at("model").at("output_dim").get<int>();
    ckpt.params = ModelParams(cfg);
    if (header.at("param_count").get<std::size_t>() != ckpt.params.size())
      throw IoError("checkpoint parameter count does not match its model config");
    if (header.contains("normalization")) {
      NormStats s;
      s.mean = header["normalization"].at("mean").get<std::array<double, kInputChannels>>();
      s.std = header["normalization"].at("std").get<std::array<double, kInputChannels>>();
      ckpt.norm = s;
    }
    ckpt.train_fingerprint = header.value("train_fingerprint", "");
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint header in " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("invalid model config in " + path + ": " + e.what());
  }
  if (!read_le_doubles(is, {ckpt.params.flat().data(), ckpt.params.size()}))
    throw IoError("checkpoint: truncated parameter block");
  return ckpt;
}

}  // namespace dvlalign
