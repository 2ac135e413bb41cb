#pragma once

#include "dvlalign/alignnet.hpp"
#include "dvlalign/dataset.hpp"

#include <map>
#include <string>

namespace dvlalign {

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
/// Throws ConfigError on malformed lines or duplicate keys, IoError if unreadable.
std::map<std::string, std::string> read_key_values(const std::string& path);
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Everything a config file can set. Keys mirror the field names, e.g.
/// `count`, `imu.accel_bias_ug`, `trajectory.speed_min`, `train.learning_rate`.
struct RunConfig {
  DatasetManifest dataset;
  ModelConfig model;
  TrainConfig train;
};

/// Starts from defaults and applies every key; unknown keys and bad values throw ConfigError.
RunConfig run_config_from(const std::map<std::string, std::string>& kv);
RunConfig load_run_config(const std::string& path);

}  // namespace dvlalign
