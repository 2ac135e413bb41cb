#pragma once

#include "dvlalign/alignnet.hpp"
#include "dvlalign/simulate.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dvlalign {

inline constexpr int kDatasetFormatVersion = 1;

struct Splits {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> val;
  std::vector<std::uint64_t> test;
};

/// Contiguous index ranges: train = floor(0.6 N), the remainder halved with the odd
/// one going to test. 10648 -> 6388 / 2130 / 2130.
Splits make_splits(std::uint64_t count);

enum class RecordEncoding { kBinary, kCsv };

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  std::uint64_t base_seed = 0;
  std::uint64_t count = 500;
  SimulationConfig simulation;
  RecordEncoding encoding = RecordEncoding::kBinary;
  Splits splits;  // filled from count by generate_dataset

  std::uint64_t seed_of(std::uint64_t index) const { return base_seed + index; }
  void validate() const;
};

/// Record file layout. Line 1: "DVLALIGN-RECORD <version>". Line 2: a JSON object
/// with index, seed, the drawn trajectory config, label_deg {roll, pitch, yaw},
/// dvl_rate, rows, encoding and the column names. Then `rows` rows of the 13 columns
/// t_s, vb_x..z, vd_x..z, vb_true_x..z, vd_true_x..z: row-major little-endian float64
/// for "f64le", or one comma-separated line per row (%.17g) for "csv".
inline constexpr int kRecordFormatVersion = 1;

void write_record(const std::string& path, const TrajectoryRecord& rec, RecordEncoding encoding);
TrajectoryRecord read_record(const std::string& path);

std::string record_filename(std::uint64_t index, RecordEncoding encoding);

void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

/// Runs fn(i) for i in [0, n) on `workers` threads (0 = hardware concurrency).
/// Rethrows the exception of the lowest failing index.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Writes dir/manifest.json and dir/records/<index>.{bin,csv}. Returns the manifest with
/// splits filled in. Throws ConfigError or IoError.
DatasetManifest generate_dataset(DatasetManifest manifest, const std::string& dir, unsigned workers = 0);

struct Dataset {
  std::string dir;
  DatasetManifest manifest;

  static Dataset open(const std::string& dir);
  TrajectoryRecord load(std::uint64_t index) const;
  std::vector<TrajectoryRecord> load_all(const std::vector<std::uint64_t>& indices, unsigned workers = 0) const;
};

/// Leading `rows` DVL epochs as network input columns [v_b, v_d].
WindowInput record_window(const TrajectoryRecord& rec, std::size_t rows);

}  // namespace dvlalign
