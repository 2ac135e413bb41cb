#include "dvlalign/pipeline.hpp"

#include "dvlalign/baseline.hpp"
#include "dvlalign/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

namespace dvlalign {

std::string method_name(Method m) { return m == Method::kSvdBaseline ? "svd-baseline" : "alignnet"; }

Method method_from_name(const std::string& name) {
  if (name == "svd-baseline") return Method::kSvdBaseline;
  if (name == "alignnet") return Method::kAlignNet;
  throw ConfigError("unknown method '" + name + "' (expected svd-baseline or alignnet)");
}

EvalReport evaluate(const std::vector<TrajectoryRecord>& test, Method method, const std::vector<double>& windows,
                    const Checkpoint* checkpoint, unsigned workers) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (method == Method::kAlignNet && (checkpoint == nullptr || !checkpoint->norm))
    throw ConfigError("alignnet evaluation needs a checkpoint with normalization statistics");

  EvalReport report;
  report.method = method_name(method);
  std::vector<EulerAngles> truth;
  for (const auto& r : test) truth.push_back(r.label);

  for (double w : windows) {
    if (!(w > 0.0)) throw std::invalid_argument("evaluate: window lengths must be positive");
    std::vector<EulerAngles> est(test.size());
    std::vector<char> degenerate(test.size(), 0);
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(test.size(), workers, [&](std::size_t i) {
      const TrajectoryRecord& rec = test[i];
      const std::size_t rows = window_epochs(w, rec.dvl_rate);
      if (rows > rec.size())
        throw std::invalid_argument("evaluate: " + std::to_string(w) + " s window exceeds trajectory " +
                                    std::to_string(rec.index));
      if (method == Method::kSvdBaseline) {
        try {
          est[i] = baseline_align(rec.pairs(), w, rec.dvl_rate);
        } catch (const DegenerateError&) {
          est[i] = EulerAngles{};
          degenerate[i] = 1;
        }
      } else {
        est[i] = predict_alignment(checkpoint->params, record_window(rec, rows), checkpoint->norm);
      }
    });
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.windows.push_back({w, angle_rmse(truth, est), test.size(),
                              static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1)), runtime});
  }
  return report;
}

std::vector<ImuCondition> standard_imu_conditions() {
  return {{"100ug_1dph", 100.0, 1.0}, {"200ug_1dph", 200.0, 1.0}, {"10ug_1dph", 10.0, 1.0}, {"10ug_0.1dph", 10.0, 0.1}};
}

SimulationConfig with_imu_condition(SimulationConfig sim, const ImuCondition& c) {
  const ImuErrorConfig biases = ImuErrorConfig::from_biases(c.accel_bias_ug, c.gyro_bias_deg_per_hour);
  sim.imu.accel_bias = biases.accel_bias;
  sim.imu.gyro_bias = biases.gyro_bias;
  sim.imu.accel_noise_std = biases.accel_noise_std;
  sim.imu.gyro_noise_std = biases.gyro_noise_std;
  return sim;
}

std::vector<EvalReport> noise_sweep(const DatasetManifest& manifest, const std::vector<std::uint64_t>& indices,
                                    const Checkpoint* checkpoint, const std::vector<ImuCondition>& conditions,
                                    const std::vector<double>& windows, unsigned workers) {
  std::vector<EvalReport> out;
  for (const ImuCondition& c : conditions) {
    const SimulationConfig sim = with_imu_condition(manifest.simulation, c);
    sim.validate();
    std::vector<TrajectoryRecord> recs(indices.size());
    parallel_for(indices.size(), workers,
                 [&](std::size_t i) { recs[i] = simulate_record(sim, manifest.seed_of(indices[i]), indices[i]); });
    out.push_back(evaluate(recs, Method::kSvdBaseline, windows, nullptr, workers));
    out.back().config_label = c.label;
    if (checkpoint != nullptr) {
      out.push_back(evaluate(recs, Method::kAlignNet, windows, checkpoint, workers));
      out.back().config_label = c.label;
    }
  }
  return out;
}

namespace {

void write_rows(std::ostream& os, const EvalReport& r, bool include_runtime, bool with_config) {
  char buf[160];
  for (const WindowScore& s : r.windows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%.6f,%zu,%.6f\n", r.method.c_str(), s.window_s, s.rmse_deg, s.n,
                  include_runtime ? s.runtime_s : 0.0);
    if (with_config) os << r.config_label << ',';
    os << buf;
  }
}

}  // namespace

void write_eval_csv(std::ostream& os, const std::vector<EvalReport>& reports, bool include_runtime) {
  os << "method,window_s,rmse_deg,n,runtime_s\n";
  for (const auto& r : reports) write_rows(os, r, include_runtime, false);
}

void write_sweep_csv(std::ostream& os, const std::vector<EvalReport>& reports, bool include_runtime) {
  os << "config,method,window_s,rmse_deg,n,runtime_s\n";
  for (const auto& r : reports) write_rows(os, r, include_runtime, true);
}

TrainedModel train_on_records(const std::vector<TrajectoryRecord>& train_set,
                              const std::vector<TrajectoryRecord>& val_set, const ModelConfig& mcfg,
                              const TrainConfig& tcfg) {
  tcfg.validate();
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train_on_records: empty split");
  const std::size_t rows = static_cast<std::size_t>(
      *std::max_element(tcfg.window_choices.begin(), tcfg.window_choices.end()));

  auto leading = [&](const TrajectoryRecord& r) { return record_window(r, std::min(rows, r.size())); };
  std::vector<WindowInput> raw;
  raw.reserve(train_set.size());
  for (const auto& r : train_set) raw.push_back(leading(r));
  const NormStats stats = NormStats::from_windows(raw);

  std::vector<AlignmentWindow> tr, va;
  tr.reserve(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) tr.push_back({stats.apply(raw[i]), train_set[i].label});
  raw.clear();
  for (const auto& r : val_set) va.push_back({stats.apply(leading(r)), r.label});

  TrainedModel out;
  out.result = train(tr, va, mcfg, tcfg);
  out.checkpoint = {out.result.params, stats, tcfg.fingerprint()};
  return out;
}

void write_loss_csv(std::ostream& os, const std::vector<EpochLog>& log) {
  os << "epoch,train_loss,val_loss,lr\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", e.epoch, e.train_loss, e.val_loss, e.learning_rate);
    os << buf;
  }
}

}  // namespace dvlalign
