#include "dvlalign/dataset.hpp"

#include "dvlalign/binary_io.hpp"
#include "dvlalign/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace dvlalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRecordMagic = "DVLALIGN-RECORD";
constexpr int kColumns = 13;

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> json_vec(const json& j) {
  if (!j.is_array() || j.size() != N) throw IoError("expected an array of length " + std::to_string(N));
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json range_json(const Range& r) { return {r.lo, r.hi}; }
Range json_range(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json trajectory_json(const TrajectoryConfig& c) {
  return {{"duration", c.duration},           {"imu_rate", c.imu_rate},
          {"speed", c.speed},                 {"leg_length", c.leg_length},
          {"turn_rate", c.turn_rate},         {"turn_ramp", c.turn_ramp},
          {"depth", c.depth},                 {"initial_heading", c.initial_heading},
          {"leg_phase", c.leg_phase},         {"first_turn_direction", c.first_turn_direction},
          {"turn_sideslip", c.turn_sideslip}, {"sway_amplitude", c.sway_amplitude},
          {"sway_period", c.sway_period},     {"sway_phase", c.sway_phase},
          {"seed", c.seed}};
}

TrajectoryConfig json_trajectory(const json& j) {
  TrajectoryConfig c;
  c.duration = j.at("duration");
  c.imu_rate = j.at("imu_rate");
  c.speed = j.at("speed");
  c.leg_length = j.at("leg_length");
  c.turn_rate = j.at("turn_rate");
  c.turn_ramp = j.at("turn_ramp");
  c.depth = j.at("depth");
  c.initial_heading = j.at("initial_heading");
  c.leg_phase = j.at("leg_phase");
  c.first_turn_direction = j.at("first_turn_direction");
  c.turn_sideslip = j.at("turn_sideslip");
  c.sway_amplitude = j.at("sway_amplitude");
  c.sway_period = j.at("sway_period");
  c.sway_phase = j.at("sway_phase");
  c.seed = j.at("seed");
  return c;
}

json ranges_json(const TrajectoryRanges& r) {
  return {{"duration", r.duration},
          {"imu_rate", r.imu_rate},
          {"depth", r.depth},
          {"turn_ramp", r.turn_ramp},
          {"speed", range_json(r.speed)},
          {"turn_rate", range_json(r.turn_rate)},
          {"leg_length", range_json(r.leg_length)},
          {"initial_heading", range_json(r.initial_heading)},
          {"leg_phase", range_json(r.leg_phase)},
          {"turn_sideslip", range_json(r.turn_sideslip)},
          {"sway_amplitude", range_json(r.sway_amplitude)},
          {"sway_period", range_json(r.sway_period)}};
}

TrajectoryRanges json_ranges(const json& j) {
  TrajectoryRanges r;
  r.duration = j.at("duration");
  r.imu_rate = j.at("imu_rate");
  r.depth = j.at("depth");
  r.turn_ramp = j.at("turn_ramp");
  r.speed = json_range(j.at("speed"));
  r.turn_rate = json_range(j.at("turn_rate"));
  r.leg_length = json_range(j.at("leg_length"));
  r.initial_heading = json_range(j.at("initial_heading"));
  r.leg_phase = json_range(j.at("leg_phase"));
  r.turn_sideslip = json_range(j.at("turn_sideslip"));
  r.sway_amplitude = json_range(j.at("sway_amplitude"));
  r.sway_period = json_range(j.at("sway_period"));
  return r;
}

json imu_json(const ImuErrorConfig& c) {
  return {{"accel_scale", vec_json(c.accel_scale)}, {"accel_bias", vec_json(c.accel_bias)},
          {"accel_noise_std", c.accel_noise_std},   {"gyro_scale", vec_json(c.gyro_scale)},
          {"gyro_bias", vec_json(c.gyro_bias)},     {"gyro_noise_std", c.gyro_noise_std}};
}

ImuErrorConfig json_imu(const json& j) {
  ImuErrorConfig c;
  c.accel_scale = json_vec<3>(j.at("accel_scale"));
  c.accel_bias = json_vec<3>(j.at("accel_bias"));
  c.accel_noise_std = j.at("accel_noise_std");
  c.gyro_scale = json_vec<3>(j.at("gyro_scale"));
  c.gyro_bias = json_vec<3>(j.at("gyro_bias"));
  c.gyro_noise_std = j.at("gyro_noise_std");
  return c;
}

json dvl_json(const DvlErrorConfig& c) {
  return {{"scale", c.scale}, {"beam_scale", vec_json(c.beam_scale)}, {"bias", vec_json(c.bias)}, {"noise_std", c.noise_std}};
}

DvlErrorConfig json_dvl(const json& j) {
  DvlErrorConfig c;
  c.scale = j.at("scale");
  c.beam_scale = json_vec<4>(j.at("beam_scale"));
  c.bias = json_vec<4>(j.at("bias"));
  c.noise_std = j.at("noise_std");
  return c;
}

const char* encoding_name(RecordEncoding e) { return e == RecordEncoding::kBinary ? "f64le" : "csv"; }

RecordEncoding encoding_from(const std::string& s) {
  if (s == "f64le") return RecordEncoding::kBinary;
  if (s == "csv") return RecordEncoding::kCsv;
  throw IoError("unknown record encoding '" + s + "'");
}

}  // namespace

Splits make_splits(std::uint64_t count) {
  const std::uint64_t n_train = count * 6 / 10;
  const std::uint64_t rest = count - n_train;
  const std::uint64_t n_val = rest / 2;
  Splits s;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (i < n_train)
      s.train.push_back(i);
    else if (i < n_train + n_val)
      s.val.push_back(i);
    else
      s.test.push_back(i);
  }
  return s;
}

void DatasetManifest::validate() const {
  if (format_version != kDatasetFormatVersion) throw ConfigError("unsupported dataset format version");
  if (count == 0) throw ConfigError("count must be positive");
  simulation.validate();
}

std::string record_filename(std::uint64_t index, RecordEncoding encoding) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu.%s", static_cast<unsigned long long>(index),
                encoding == RecordEncoding::kBinary ? "bin" : "csv");
  return buf;
}

void write_record(const std::string& path, const TrajectoryRecord& rec, RecordEncoding encoding) {
  const std::size_t rows = rec.size();
  if (rec.v_b.size() != rows || rec.v_d.size() != rows || rec.v_b_true.size() != rows || rec.v_d_true.size() != rows)
    throw std::invalid_argument("write_record: column length mismatch");
  json header = {{"index", rec.index},
                 {"seed", rec.seed},
                 {"trajectory", trajectory_json(rec.trajectory)},
                 {"label_deg",
                  {{"roll", rec.label.roll * kRadToDeg},
                   {"pitch", rec.label.pitch * kRadToDeg},
                   {"yaw", rec.label.yaw * kRadToDeg}}},
                 {"label_rad", {rec.label.roll, rec.label.pitch, rec.label.yaw}},
                 {"dvl_rate", rec.dvl_rate},
                 {"rows", rows},
                 {"encoding", encoding_name(encoding)},
                 {"columns",
                  {"t_s", "vb_x", "vb_y", "vb_z", "vd_x", "vd_y", "vd_z", "vb_true_x", "vb_true_y", "vb_true_z",
                   "vd_true_x", "vd_true_y", "vd_true_z"}}};

  std::vector<double> table(rows * kColumns);
  for (std::size_t k = 0; k < rows; ++k) {
    double* r = &table[k * kColumns];
    r[0] = rec.t[k];
    for (int i = 0; i < 3; ++i) {
      r[1 + i] = rec.v_b[k](i);
      r[4 + i] = rec.v_d[k](i);
      r[7 + i] = rec.v_b_true[k](i);
      r[10 + i] = rec.v_d_true[k](i);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open record for writing: " + path);
  os << kRecordMagic << ' ' << kRecordFormatVersion << '\n' << header.dump() << '\n';
  if (encoding == RecordEncoding::kBinary) {
    write_le_doubles(os, table);
  } else {
    char buf[32];
    for (std::size_t k = 0; k < rows; ++k) {
      for (int c = 0; c < kColumns; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", table[k * kColumns + c]);
        os << buf << (c + 1 < kColumns ? ',' : '\n');
      }
    }
  }
  if (!os) throw IoError("failed writing record: " + path);
}

TrajectoryRecord read_record(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open record: " + path);
  std::string magic_line, header_line;
  std::getline(is, magic_line);
  if (magic_line != std::string(kRecordMagic) + ' ' + std::to_string(kRecordFormatVersion))
    throw IoError("not a version " + std::to_string(kRecordFormatVersion) + " record: " + path);
  std::getline(is, header_line);

  TrajectoryRecord rec;
  std::size_t rows = 0;
  RecordEncoding encoding = RecordEncoding::kBinary;
  try {
    const json h = json::parse(header_line);
    rec.index = h.at("index");
    rec.seed = h.at("seed");
    rec.trajectory = json_trajectory(h.at("trajectory"));
    const json& lr = h.at("label_rad");
    rec.label = {lr.at(0).get<double>(), lr.at(1).get<double>(), lr.at(2).get<double>()};
    rec.dvl_rate = h.at("dvl_rate");
    rows = h.at("rows");
    encoding = encoding_from(h.at("encoding").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError("malformed record header in " + path + ": " + e.what());
  }

  std::vector<double> table(rows * kColumns);
  if (encoding == RecordEncoding::kBinary) {
    if (!read_le_doubles(is, table)) throw IoError("truncated record: " + path);
  } else {
    std::string line;
    for (std::size_t k = 0; k < rows; ++k) {
      if (!std::getline(is, line)) throw IoError("truncated record: " + path);
      std::istringstream ls(line);
      std::string cell;
      for (int c = 0; c < kColumns; ++c) {
        if (!std::getline(ls, cell, ',')) throw IoError("short row in record: " + path);
        try {
          table[k * kColumns + c] = std::stod(cell);
        } catch (const std::exception&) {
          throw IoError("bad number '" + cell + "' in record: " + path);
        }
      }
    }
  }

  rec.t.resize(rows);
  rec.v_b.resize(rows);
  rec.v_d.resize(rows);
  rec.v_b_true.resize(rows);
  rec.v_d_true.resize(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const double* r = &table[k * kColumns];
    rec.t[k] = r[0];
    rec.v_b[k] = Vector3(r[1], r[2], r[3]);
    rec.v_d[k] = Vector3(r[4], r[5], r[6]);
    rec.v_b_true[k] = Vector3(r[7], r[8], r[9]);
    rec.v_d_true[k] = Vector3(r[10], r[11], r[12]);
  }
  return rec;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  const SimulationConfig& s = m.simulation;
  json j = {{"format_version", m.format_version},
            {"base_seed", m.base_seed},
            {"count", m.count},
            {"encoding", encoding_name(m.encoding)},
            {"simulation",
             {{"trajectory", ranges_json(s.trajectory)},
              {"imu", imu_json(s.imu)},
              {"dvl", dvl_json(s.dvl)},
              {"beam_pitch", s.beam_pitch},
              {"dvl_rate", s.dvl_rate},
              {"misalignment_deg", range_json(s.misalignment_deg)}}},
            {"splits", {{"train", m.splits.train}, {"val", m.splits.val}, {"test", m.splits.test}}}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open manifest for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  DatasetManifest m;
  try {
    const json j = json::parse(is);
    m.format_version = j.at("format_version");
    if (m.format_version != kDatasetFormatVersion) throw IoError("unsupported manifest version in " + path);
    m.base_seed = j.at("base_seed");
    m.count = j.at("count");
    m.encoding = encoding_from(j.at("encoding").get<std::string>());
    const json& s = j.at("simulation");
    m.simulation.trajectory = json_ranges(s.at("trajectory"));
    m.simulation.imu = json_imu(s.at("imu"));
    m.simulation.dvl = json_dvl(s.at("dvl"));
    m.simulation.beam_pitch = s.at("beam_pitch");
    m.simulation.dvl_rate = s.at("dvl_rate");
    m.simulation.misalignment_deg = json_range(s.at("misalignment_deg"));
    m.splits.train = j.at("splits").at("train").get<std::vector<std::uint64_t>>();
    m.splits.val = j.at("splits").at("val").get<std::vector<std::uint64_t>>();
    m.splits.test = j.at("splits").at("test").get<std::vector<std::uint64_t>>();
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path + ": " + e.what());
  }
  return m;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

DatasetManifest generate_dataset(DatasetManifest manifest, const std::string& dir, unsigned workers) {
  manifest.validate();
  manifest.splits = make_splits(manifest.count);
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "records", ec);
  if (ec) throw IoError("cannot create dataset directory " + dir + ": " + ec.message());
  parallel_for(manifest.count, workers, [&](std::size_t i) {
    const TrajectoryRecord rec = simulate_record(manifest.simulation, manifest.seed_of(i), i);
    write_record((fs::path(dir) / "records" / record_filename(i, manifest.encoding)).string(), rec, manifest.encoding);
  });
  write_manifest((fs::path(dir) / "manifest.json").string(), manifest);
  return manifest;
}

Dataset Dataset::open(const std::string& dir) {
  return {dir, read_manifest((fs::path(dir) / "manifest.json").string())};
}

TrajectoryRecord Dataset::load(std::uint64_t index) const {
  if (index >= manifest.count) throw std::out_of_range("trajectory index " + std::to_string(index) + " not in dataset");
  return read_record((fs::path(dir) / "records" / record_filename(index, manifest.encoding)).string());
}

std::vector<TrajectoryRecord> Dataset::load_all(const std::vector<std::uint64_t>& indices, unsigned workers) const {
  std::vector<TrajectoryRecord> out(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t i) { out[i] = load(indices[i]); });
  return out;
}

WindowInput record_window(const TrajectoryRecord& rec, std::size_t rows) {
  if (rows > rec.size()) throw std::invalid_argument("record_window: window longer than the record");
  WindowInput x(static_cast<Eigen::Index>(rows), kInputChannels);
  for (std::size_t k = 0; k < rows; ++k) {
    x.row(static_cast<Eigen::Index>(k)).head<3>() = rec.v_b[k].transpose();
    x.row(static_cast<Eigen::Index>(k)).tail<3>() = rec.v_d[k].transpose();
  }
  return x;
}

}  // namespace dvlalign
