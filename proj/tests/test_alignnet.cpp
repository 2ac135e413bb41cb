#include "dvlalign/alignnet.hpp"
#include "dvlalign/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

namespace dvlalign {
namespace {

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.channels = {4, 8, 16};
  cfg.fc_width = 8;
  return cfg;
}

WindowInput random_window(int rows, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  WindowInput x(rows, kInputChannels);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

std::vector<AlignmentWindow> random_set(int count, int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a(-0.5, 0.5);
  std::vector<AlignmentWindow> out;
  for (int i = 0; i < count; ++i) out.push_back({random_window(rows, rng), {a(rng), a(rng), a(rng)}});
  return out;
}

bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

TEST(AlignNet, ParameterLayout) {
  const ModelParams p(ModelConfig{});
  ASSERT_EQ(p.shapes().size(), 10u);
  EXPECT_EQ(p.tensor(0).rows(), 64);
  EXPECT_EQ(p.tensor(0).cols(), 5 * 6);
  EXPECT_EQ(p.tensor(4).rows(), 256);
  EXPECT_EQ(p.tensor(4).cols(), 5 * 128);
  EXPECT_EQ(p.tensor(6).rows(), 512);
  EXPECT_EQ(p.tensor(6).cols(), 256);
  EXPECT_EQ(p.tensor(8).rows(), 3);
  const std::size_t expected = (64 * 30 + 64) + (128 * 320 + 128) + (256 * 640 + 256) + (512 * 256 + 512) + (3 * 512 + 3);
  EXPECT_EQ(p.size(), expected);
}

TEST(AlignNet, BatchShapesAndLengths) {
  const ModelParams p = init_params(ModelConfig{}, 1);
  std::mt19937_64 rng(2);
  std::vector<WindowInput> batch;
  for (int i = 0; i < 32; ++i) batch.push_back(random_window(125, rng));
  EXPECT_EQ(forward(p, batch).size(), 32u);
  EXPECT_TRUE(forward(p, random_window(25, rng)).allFinite());
  EXPECT_TRUE(forward(p, random_window(500, rng)).allFinite());
  EXPECT_THROW(forward(p, random_window(4, rng)), std::invalid_argument);
}

TEST(AlignNet, ZeroInputWithZeroBiasesGivesZero) {
  const ModelParams p = init_params(ModelConfig{}, 3);
  const WindowInput x = WindowInput::Zero(50, kInputChannels);
  EXPECT_EQ(forward(p, x), Eigen::Vector3d::Zero());
}

TEST(AlignNet, PredictionIndependentOfBatchComposition) {
  const ModelParams p = init_params(small_model(), 4);
  std::mt19937_64 rng(5);
  std::vector<WindowInput> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(random_window(20 + 7 * i, rng));
  const auto outs = forward(p, batch);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(outs[i], forward(p, batch[i]));
}

TEST(AlignNet, SmallNormalInitGivesSmallOutputs) {
  const ModelParams p = init_params(ModelConfig{}, 6, InitScheme::kNormal, 1e-2);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) EXPECT_LT(forward(p, random_window(125, rng)).cwiseAbs().maxCoeff(), 0.1);
  const double std = std::sqrt(p.flat().squaredNorm() / static_cast<double>(p.size()));
  EXPECT_NEAR(std, 1e-2, 1e-4);
}

TEST(AlignNet, MseLossExamples) {
  const std::vector<Eigen::Vector3d> one{{0.1, 0.0, 0.0}};
  const std::vector<EulerAngles> zero(1);
  EXPECT_NEAR(mse_loss(one, zero), 0.01, 1e-15);
  const std::vector<Eigen::Vector3d> two{{0.1, 0.1, 0.0}};
  EXPECT_NEAR(mse_loss(two, zero), 0.02, 1e-15);
  const std::vector<Eigen::Vector3d> both{{0.1, 0.0, 0.0}, {0.1, 0.1, 0.0}};
  EXPECT_NEAR(mse_loss(both, std::vector<EulerAngles>(2)), 0.015, 1e-15);
}

TEST(AlignNet, GradientMatchesFiniteDifferences) {
  ModelParams p = init_params(small_model(), 8, InitScheme::kNormal, 0.3);
  const auto set = random_set(3, 12, 9);
  std::vector<WindowInput> xs;
  std::vector<EulerAngles> ys;
  for (const auto& w : set) {
    xs.push_back(w.x);
    ys.push_back(w.label);
  }
  const LossAndGradient lg = backward(p, xs, ys);
  EXPECT_NEAR(lg.loss, mse_loss(forward(p, xs), ys), 1e-14);
  const double eps = 1e-5;
  int checked = 0;
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
    const double saved = p.flat()(i);
    p.flat()(i) = saved + eps;
    const double up = mse_loss(forward(p, xs), ys);
    p.flat()(i) = saved - eps;
    const double down = mse_loss(forward(p, xs), ys);
    p.flat()(i) = saved;
    const double fd = (up - down) / (2 * eps);
    const double denom = std::max({std::abs(fd), std::abs(lg.gradient(i)), 1e-3});
    EXPECT_LT(std::abs(fd - lg.gradient(i)) / denom, 1e-4) << "parameter " << i;
    ++checked;
  }
  EXPECT_EQ(checked, static_cast<int>(p.size()));
}

TEST(AlignNet, OutputBiasGradientIsMeanResidual) {
  const ModelParams p = init_params(small_model(), 10, InitScheme::kNormal, 0.3);
  const auto set = random_set(4, 15, 11);
  std::vector<WindowInput> xs;
  std::vector<EulerAngles> ys;
  for (const auto& w : set) {
    xs.push_back(w.x);
    ys.push_back(w.label);
  }
  const auto preds = forward(p, xs);
  Eigen::Vector3d expected = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) expected += 2.0 * (preds[i] - ys[i].as_vector()) / 4.0;
  const auto& bias = p.shapes()[9];
  const LossAndGradient lg = backward(p, xs, ys);
  EXPECT_LT((lg.gradient.segment(static_cast<Eigen::Index>(bias.offset), 3) - expected).cwiseAbs().maxCoeff(), 1e-14);

  // Labels equal to predictions: zero residual, zero gradient.
  std::vector<EulerAngles> exact;
  for (const auto& v : preds) exact.push_back({v(0), v(1), v(2)});
  const LossAndGradient zero = backward(p, xs, exact);
  EXPECT_EQ(zero.loss, 0.0);
  EXPECT_EQ(zero.gradient.cwiseAbs().maxCoeff(), 0.0);

  // Doubling every residual doubles the gradient.
  std::vector<EulerAngles> doubled;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Eigen::Vector3d y = preds[i] - 2.0 * (preds[i] - ys[i].as_vector());
    doubled.push_back({y(0), y(1), y(2)});
  }
  EXPECT_LT((backward(p, xs, doubled).gradient - 2.0 * lg.gradient).cwiseAbs().maxCoeff(),
            1e-12 * std::max(1.0, lg.gradient.cwiseAbs().maxCoeff()));
}

TrainConfig small_train() {
  TrainConfig t;
  t.learning_rate = 1e-2;
  t.batch_size = 4;
  t.window_choices = {16};
  t.max_epochs = 300;
  t.early_stop_patience = 300;
  t.seed = 12;
  return t;
}

TEST(AlignNet, OverfitsTinySet) {
  const auto set = random_set(8, 16, 13);
  const ModelParams init = init_params(small_model(), 12);
  const std::vector<int> len{16};
  const double before = evaluate_loss(init, set, len);
  const TrainResult r = train(set, set, small_model(), small_train());
  EXPECT_LT(r.best_val_loss, 0.01 * before);
  EXPECT_LT(evaluate_loss(r.params, set, len), 0.01 * before);
}

TEST(AlignNet, ZeroLearningRateFreezesParametersAndStopsEarly) {
  const auto set = random_set(8, 16, 14);
  TrainConfig t = small_train();
  t.learning_rate = 0.0;
  t.early_stop_patience = 15;
  const TrainResult r = train(set, set, small_model(), t);
  EXPECT_TRUE(bit_equal(r.params.flat(), init_params(small_model(), t.seed).flat()));
  EXPECT_EQ(r.best_epoch, 1);
  EXPECT_EQ(r.log.size(), 16u);
}

TEST(AlignNet, PlateauDecaysLearningRate) {
  const auto set = random_set(8, 16, 15);
  TrainConfig t = small_train();
  t.learning_rate = 1e-14;
  t.early_stop_patience = 15;
  const TrainResult r = train(set, set, small_model(), t);
  ASSERT_EQ(r.log.size(), 16u);
  EXPECT_EQ(t.plateau_epochs(), 5);
  EXPECT_EQ(r.log[5].learning_rate, 1e-14);
  EXPECT_EQ(r.log[6].learning_rate, 0.5e-14);
  EXPECT_EQ(r.log[11].learning_rate, 0.25e-14);
}

TEST(AlignNet, TrainingIsDeterministic) {
  const auto set = random_set(8, 16, 16);
  TrainConfig t = small_train();
  t.max_epochs = 5;
  const TrainResult a = train(set, set, small_model(), t);
  const TrainResult b = train(set, set, small_model(), t);
  EXPECT_TRUE(bit_equal(a.params.flat(), b.params.flat()));
  t.seed = 13;
  EXPECT_FALSE(bit_equal(a.params.flat(), train(set, set, small_model(), t).params.flat()));
}

TEST(AlignNet, NonFiniteLossIsReported) {
  auto set = random_set(4, 16, 17);
  set[0].x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig t = small_train();
  t.max_epochs = 1;
  EXPECT_THROW(train(set, set, small_model(), t), DivergenceError);
}

TEST(AlignNet, NormStatsStandardize) {
  std::vector<WindowInput> ws(2, WindowInput::Zero(2, kInputChannels));
  ws[0].col(0) << 1, 2;
  ws[1].col(0) << 3, 4;
  ws[0].col(1).setConstant(5);
  ws[1].col(1).setConstant(5);
  const NormStats s = NormStats::from_windows(ws);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_NEAR(s.std[0], std::sqrt(1.25), 1e-15);
  EXPECT_DOUBLE_EQ(s.mean[1], 5.0);
  EXPECT_DOUBLE_EQ(s.std[1], 1.0);
  const WindowInput z = s.apply(ws[1]);
  EXPECT_NEAR(z(1, 0), 1.5 / std::sqrt(1.25), 1e-15);
  EXPECT_EQ(z(0, 1), 0.0);
}

TEST(AlignNet, PredictRequiresNormalization) {
  const ModelParams p = init_params(small_model(), 1);
  std::mt19937_64 rng(1);
  const WindowInput x = random_window(30, rng);
  EXPECT_THROW(predict_alignment(p, x, std::nullopt), std::invalid_argument);
  const NormStats s = NormStats::from_windows(std::vector<WindowInput>{x});
  const EulerAngles e = predict_alignment(p, x, s);
  EXPECT_EQ(e.as_vector(), forward(p, s.apply(x)));
}

TEST(AlignNet, CheckpointRoundTrip) {
  Checkpoint c;
  c.params = init_params(ModelConfig{}, 18, InitScheme::kNormal, 0.5);
  std::mt19937_64 rng(2);
  const std::vector<WindowInput> ws{random_window(40, rng)};
  c.norm = NormStats::from_windows(ws);
  c.train_fingerprint = TrainConfig{}.fingerprint();
  const auto path = std::filesystem::temp_directory_path() / "dvlalign_ckpt_test.bin";
  save_checkpoint(path.string(), c);
  const Checkpoint back = load_checkpoint(path.string());
  EXPECT_TRUE(back.params.config() == c.params.config());
  EXPECT_TRUE(bit_equal(back.params.flat(), c.params.flat()));
  ASSERT_TRUE(back.norm.has_value());
  EXPECT_EQ(back.norm->mean, c.norm->mean);
  EXPECT_EQ(back.norm->std, c.norm->std);
  EXPECT_EQ(back.train_fingerprint, c.train_fingerprint);

  {
    std::ofstream bad(path, std::ios::binary);
    bad << "not a checkpoint\n";
  }
  EXPECT_THROW(load_checkpoint(path.string()), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path.string()), IoError);
}

TEST(AlignNet, FingerprintTracksConfig) {
  TrainConfig a, b;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.learning_rate = 1e-3;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

}  // namespace
}  // namespace dvlalign
