#include "dvlalign/config.hpp"

#include "dvlalign/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace dvlalign {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int<int>(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename F>
Setter number(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c, to_double(k, v)); };
}

template <typename F>
Setter degrees(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c, to_double(k, v) * kDegToRad); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // dataset
    t["base_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.dataset.base_seed = to_int<std::uint64_t>(k, v);
    };
    t["count"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.dataset.count = to_int<std::uint64_t>(k, v);
    };
    t["encoding"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "binary")
        c.dataset.encoding = RecordEncoding::kBinary;
      else if (v == "csv")
        c.dataset.encoding = RecordEncoding::kCsv;
      else
        throw ConfigError(k + ": expected binary or csv");
    };
    t["dvl_rate"] = number([](RunConfig& c, double x) { c.dataset.simulation.dvl_rate = x; });
    t["beam_pitch_deg"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.beam_pitch = x; });
    t["misalignment_deg_min"] = number([](RunConfig& c, double x) { c.dataset.simulation.misalignment_deg.lo = x; });
    t["misalignment_deg_max"] = number([](RunConfig& c, double x) { c.dataset.simulation.misalignment_deg.hi = x; });

    // imu: biases on all three axes, noise standard deviations per sample
    t["imu.accel_bias_ug"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.accel_bias.setConstant(x * kMicroG); });
    t["imu.gyro_bias_dph"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.gyro_bias.setConstant(x * kDegPerHour); });
    t["imu.accel_noise_ug"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.accel_noise_std = x * kMicroG; });
    t["imu.gyro_noise_dph"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.gyro_noise_std = x * kDegPerHour; });
    t["imu.accel_scale"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.accel_scale.setConstant(x); });
    t["imu.gyro_scale"] = number([](RunConfig& c, double x) { c.dataset.simulation.imu.gyro_scale.setConstant(x); });

    t["dvl.scale"] = number([](RunConfig& c, double x) { c.dataset.simulation.dvl.scale = x; });
    t["dvl.bias"] = number([](RunConfig& c, double x) { c.dataset.simulation.dvl.bias.setConstant(x); });
    t["dvl.noise_std"] = number([](RunConfig& c, double x) { c.dataset.simulation.dvl.noise_std = x; });

    t["trajectory.duration"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.duration = x; });
    t["trajectory.imu_rate"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.imu_rate = x; });
    t["trajectory.depth"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.depth = x; });
    t["trajectory.turn_ramp"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.turn_ramp = x; });
    t["trajectory.speed_min"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.speed.lo = x; });
    t["trajectory.speed_max"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.speed.hi = x; });
    t["trajectory.turn_rate_deg_min"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.turn_rate.lo = x; });
    t["trajectory.turn_rate_deg_max"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.turn_rate.hi = x; });
    t["trajectory.leg_length_min"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.leg_length.lo = x; });
    t["trajectory.leg_length_max"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.leg_length.hi = x; });
    t["trajectory.turn_sideslip_deg_min"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.turn_sideslip.lo = x; });
    t["trajectory.turn_sideslip_deg_max"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.turn_sideslip.hi = x; });
    t["trajectory.sway_amplitude_deg_min"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.sway_amplitude.lo = x; });
    t["trajectory.sway_amplitude_deg_max"] = degrees([](RunConfig& c, double x) { c.dataset.simulation.trajectory.sway_amplitude.hi = x; });
    t["trajectory.sway_period_min"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.sway_period.lo = x; });
    t["trajectory.sway_period_max"] = number([](RunConfig& c, double x) { c.dataset.simulation.trajectory.sway_period.hi = x; });

    t["model.channels"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const auto ch = to_int_list(k, v);
      if (ch.size() != 3) throw ConfigError(k + ": expected three channel counts");
      c.model.channels = {ch[0], ch[1], ch[2]};
    };
    t["model.kernel_size"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.kernel_size = to_int<int>(k, v); };
    t["model.fc_width"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.fc_width = to_int<int>(k, v); };

    t["train.learning_rate"] = number([](RunConfig& c, double x) { c.train.learning_rate = x; });
    t["train.batch_size"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = to_int<int>(k, v); };
    t["train.early_stop_patience"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.early_stop_patience = to_int<int>(k, v);
    };
    t["train.lr_decay_factor"] = number([](RunConfig& c, double x) { c.train.lr_decay_factor = x; });
    t["train.max_epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.max_epochs = to_int<int>(k, v); };
    t["train.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = to_int<std::uint64_t>(k, v); };
    t["train.window_choices"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.window_choices = to_int_list(k, v);
    };
    t["train.min_improvement"] = number([](RunConfig& c, double x) { c.train.min_improvement = x; });
    return t;
  }();
  return table;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_key_values(ss.str());
}

RunConfig run_config_from(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key: " + key);
    it->second(cfg, key, value);
  }
  cfg.dataset.validate();
  cfg.model.validate();
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return run_config_from(read_key_values(path)); }

}  // namespace dvlalign
