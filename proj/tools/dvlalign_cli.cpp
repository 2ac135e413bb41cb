// dvlalign: dataset generation, training, evaluation and noise sweeps.
//
// Exit codes: 0 ok, 2 bad command line, 3 bad config, 4 missing/unreadable file,
// 5 degenerate geometry, 6 stream sync failure, 7 training divergence, 1 anything else.

#include "dvlalign/config.hpp"
#include "dvlalign/dataset.hpp"
#include "dvlalign/errors.hpp"
#include "dvlalign/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dvlalign;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kConfig = 3, kIo = 4, kDegenerate = 5, kSync = 6, kDivergence = 7 };

std::vector<double> parse_windows(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad window length '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no window lengths given");
  return out;
}

// Writes to `path`, or stdout when path is empty or "-".
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open output file: " + path);
  write(os);
  if (!os) throw IoError("failed writing " + path);
}

const std::vector<std::uint64_t>& split_indices(const DatasetManifest& m, const std::string& split) {
  if (split == "train") return m.splits.train;
  if (split == "val") return m.splits.val;
  if (split == "test") return m.splits.test;
  throw ConfigError("unknown split '" + split + "'");
}

void print_degenerate(const std::vector<EvalReport>& reports) {
  for (const auto& r : reports)
    for (const auto& w : r.windows)
      if (w.degenerate > 0)
        std::cerr << "warning: " << r.method << (r.config_label.empty() ? "" : " [" + r.config_label + "]") << " at "
                  << w.window_s << " s: " << w.degenerate << " of " << w.n
                  << " windows were degenerate and scored as identity\n";
}

void inspect(const std::string& path) {
  if (fs::is_directory(path)) {
    const Dataset ds = Dataset::open(path);
    const auto& m = ds.manifest;
    const auto& s = m.simulation;
    std::cout << "dataset " << path << "\n"
              << "  format_version " << m.format_version << "\n"
              << "  base_seed " << m.base_seed << "\n"
              << "  count " << m.count << " (train " << m.splits.train.size() << ", val " << m.splits.val.size()
              << ", test " << m.splits.test.size() << ")\n"
              << "  imu accel_bias " << s.imu.accel_bias.x() / kMicroG << " ug, gyro_bias "
              << s.imu.gyro_bias.x() / kDegPerHour << " deg/h\n"
              << "  dvl scale " << s.dvl.scale << ", bias " << s.dvl.bias(0) << " m/s, noise " << s.dvl.noise_std
              << " m/s, beam pitch " << s.beam_pitch * kRadToDeg << " deg, rate " << s.dvl_rate << " Hz\n"
              << "  misalignment range [" << s.misalignment_deg.lo << ", " << s.misalignment_deg.hi << "] deg\n";
    return;
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string magic;
  std::getline(is, magic);
  if (magic == "DVLALIGN-CHECKPOINT") {
    const Checkpoint c = load_checkpoint(path);
    const auto& mc = c.params.config();
    std::cout << "checkpoint " << path << "\n"
              << "  channels " << mc.channels[0] << "," << mc.channels[1] << "," << mc.channels[2] << " kernel "
              << mc.kernel_size << " fc " << mc.fc_width << "\n"
              << "  parameters " << c.params.size() << "\n"
              << "  normalization " << (c.norm ? "yes" : "no") << "\n"
              << "  train_fingerprint " << c.train_fingerprint << "\n";
    return;
  }
  const TrajectoryRecord r = read_record(path);
  std::cout << "record " << path << "\n"
            << "  index " << r.index << " seed " << r.seed << "\n"
            << "  label_deg roll " << r.label.roll * kRadToDeg << " pitch " << r.label.pitch * kRadToDeg << " yaw "
            << r.label.yaw * kRadToDeg << "\n"
            << "  speed " << r.trajectory.speed << " m/s, leg " << r.trajectory.leg_length << " m, turn rate "
            << r.trajectory.turn_rate * kRadToDeg << " deg/s\n"
            << "  epochs " << r.size() << " at " << r.dvl_rate << " Hz\n";
}

int run(int argc, char** argv) {
  CLI::App app{"INS/DVL alignment: simulation, SVD baseline and AlignNet"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("-j,--workers", workers, "Worker threads (0 = all cores)");

  auto* gen = app.add_subcommand("gen", "Generate a dataset from a config file");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_count;
  gen->add_option("--config", gen_config, "key = value config file")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--count", gen_count, "Override the trajectory count");

  auto* tr = app.add_subcommand("train", "Train AlignNet on a dataset");
  std::string tr_dataset, tr_out, tr_log, tr_config;
  std::optional<double> tr_lr;
  std::optional<int> tr_epochs;
  tr->add_option("--dataset", tr_dataset, "Dataset directory")->required();
  tr->add_option("--out", tr_out, "Checkpoint path")->required();
  tr->add_option("--loss-log", tr_log, "Loss curve CSV (epoch,train_loss,val_loss,lr)");
  tr->add_option("--config", tr_config, "key = value config file (model.* and train.* keys)");
  tr->add_option("--lr", tr_lr, "Override train.learning_rate");
  tr->add_option("--epochs", tr_epochs, "Override train.max_epochs");

  auto* ev = app.add_subcommand("eval", "Evaluate one method on a split");
  std::string ev_dataset, ev_method = "svd-baseline", ev_ckpt, ev_windows = "5,25,50,75,100", ev_out, ev_split = "test";
  bool ev_no_runtime = false;
  ev->add_option("--dataset", ev_dataset, "Dataset directory")->required();
  ev->add_option("--method", ev_method, "svd-baseline or alignnet");
  ev->add_option("--checkpoint", ev_ckpt, "AlignNet checkpoint");
  ev->add_option("--windows", ev_windows, "Comma-separated window lengths in seconds");
  ev->add_option("--split", ev_split, "train, val or test");
  ev->add_option("--out", ev_out, "CSV path (default stdout)");
  ev->add_flag("--no-runtime", ev_no_runtime, "Write 0 in the runtime column");

  auto* bl = app.add_subcommand("baseline", "SVD baseline evaluation on a split");
  std::string bl_dataset, bl_windows = "5,25,50,75,100", bl_out, bl_split = "test";
  bool bl_no_runtime = false;
  bl->add_option("--dataset", bl_dataset, "Dataset directory")->required();
  bl->add_option("--windows", bl_windows, "Comma-separated window lengths in seconds");
  bl->add_option("--split", bl_split, "train, val or test");
  bl->add_option("--out", bl_out, "CSV path (default stdout)");
  bl->add_flag("--no-runtime", bl_no_runtime, "Write 0 in the runtime column");

  auto* sw = app.add_subcommand("sweep", "Both methods under the four IMU error configs");
  std::string sw_dataset, sw_ckpt, sw_windows = "5,25,50,75,100", sw_out;
  bool sw_no_runtime = false;
  sw->add_option("--dataset", sw_dataset, "Dataset directory")->required();
  sw->add_option("--checkpoint", sw_ckpt, "AlignNet checkpoint (omit for baseline only)");
  sw->add_option("--windows", sw_windows, "Comma-separated window lengths in seconds");
  sw->add_option("--out", sw_out, "CSV path (default stdout)");
  sw->add_flag("--no-runtime", sw_no_runtime, "Write 0 in the runtime column");

  auto* in = app.add_subcommand("inspect", "Summarize a dataset directory, record or checkpoint");
  std::string in_path;
  in->add_option("path", in_path, "Dataset directory, record file or checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (gen->parsed()) {
    RunConfig cfg = load_run_config(gen_config);
    if (gen_count) cfg.dataset.count = *gen_count;
    const DatasetManifest m = generate_dataset(cfg.dataset, gen_out, workers);
    std::cerr << "wrote " << m.count << " records to " << gen_out << "\n";
  } else if (tr->parsed()) {
    RunConfig cfg = tr_config.empty() ? RunConfig{} : load_run_config(tr_config);
    if (tr_lr) cfg.train.learning_rate = *tr_lr;
    if (tr_epochs) cfg.train.max_epochs = *tr_epochs;
    const Dataset ds = Dataset::open(tr_dataset);
    const auto train_recs = ds.load_all(ds.manifest.splits.train, workers);
    const auto val_recs = ds.load_all(ds.manifest.splits.val, workers);
    const TrainedModel model = train_on_records(train_recs, val_recs, cfg.model, cfg.train);
    save_checkpoint(tr_out, model.checkpoint);
    if (!tr_log.empty()) emit(tr_log, [&](std::ostream& os) { write_loss_csv(os, model.result.log); });
    std::cerr << "best epoch " << model.result.best_epoch << ", val loss " << model.result.best_val_loss << "\n";
  } else if (ev->parsed() || bl->parsed()) {
    const bool is_eval = ev->parsed();
    const Method method = is_eval ? method_from_name(ev_method) : Method::kSvdBaseline;
    std::optional<Checkpoint> ckpt;
    if (method == Method::kAlignNet) {
      if (ev_ckpt.empty()) throw ConfigError("--checkpoint is required for alignnet");
      ckpt = load_checkpoint(ev_ckpt);
    }
    const Dataset ds = Dataset::open(is_eval ? ev_dataset : bl_dataset);
    const auto recs = ds.load_all(split_indices(ds.manifest, is_eval ? ev_split : bl_split), workers);
    const auto windows = parse_windows(is_eval ? ev_windows : bl_windows);
    const std::vector<EvalReport> reports{evaluate(recs, method, windows, ckpt ? &*ckpt : nullptr, workers)};
    print_degenerate(reports);
    const bool runtime = !(is_eval ? ev_no_runtime : bl_no_runtime);
    emit(is_eval ? ev_out : bl_out, [&](std::ostream& os) { write_eval_csv(os, reports, runtime); });
  } else if (sw->parsed()) {
    std::optional<Checkpoint> ckpt;
    if (!sw_ckpt.empty()) ckpt = load_checkpoint(sw_ckpt);
    const Dataset ds = Dataset::open(sw_dataset);
    const auto reports = noise_sweep(ds.manifest, ds.manifest.splits.test, ckpt ? &*ckpt : nullptr,
                                     standard_imu_conditions(), parse_windows(sw_windows), workers);
    print_degenerate(reports);
    emit(sw_out, [&](std::ostream& os) { write_sweep_csv(os, reports, !sw_no_runtime); });
  } else if (in->parsed()) {
    inspect(in_path);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const SyncError& e) {
    std::cerr << "sync error: " << e.what() << "\n";
    return kSync;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
