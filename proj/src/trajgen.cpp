#include "dvlalign/trajgen.hpp"

#include "dvlalign/errors.hpp"
#include "dvlalign/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace dvlalign {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("trajectory config: " + what);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

struct Segment {
  bool turn = false;
  double t0 = 0.0;
  double t1 = 0.0;
  double course0 = 0.0;
  int dir = 1;
};

// Course and course rate, together with the sideslip contribution, as closed-form
// functions of time.
class Kinematics {
 public:
  explicit Kinematics(const TrajectoryConfig& cfg) : cfg_(cfg) {
    ramp_ = std::min(cfg.turn_ramp, kPi / cfg.turn_rate);
    plateau_ = kPi / cfg.turn_rate - ramp_;
    turn_duration_ = plateau_ + 2.0 * ramp_;

    const double leg_time = cfg.leg_length / cfg.speed;
    double t = 0.0;
    double course = cfg.initial_heading;
    int dir = cfg.first_turn_direction >= 0 ? 1 : -1;
    double first = leg_time * (1.0 - cfg.leg_phase);
    segments_.push_back({false, 0.0, first, course, dir});
    t = first;
    while (t < cfg.duration) {
      segments_.push_back({true, t, t + turn_duration_, course, dir});
      t += turn_duration_;
      course += dir * kPi;
      dir = -dir;
      segments_.push_back({false, t, t + leg_time, course, dir});
      t += leg_time;
    }
  }

  const Segment& segment_at(double t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& s) { return x < s.t1; });
    if (it == segments_.end()) return segments_.back();
    return *it;
  }

  // Returns course and its rate.
  std::pair<double, double> course(double t) const {
    const Segment& seg = segment_at(t);
    if (!seg.turn) return {seg.course0, 0.0};
    const double r = cfg_.turn_rate;
    const double tau = ramp_;
    const double s = std::clamp(t - seg.t0, 0.0, turn_duration_);
    double angle, rate;
    if (tau > 0.0 && s < tau) {
      angle = r * (s / 2.0 - tau / (2.0 * kPi) * std::sin(kPi * s / tau));
      rate = r * (1.0 - std::cos(kPi * s / tau)) / 2.0;
    } else if (s <= tau + plateau_) {
      angle = r * (tau / 2.0 + (s - tau));
      rate = r;
    } else {
      const double q = s - tau - plateau_;
      angle = r * (tau / 2.0 + plateau_ + q / 2.0 + tau / (2.0 * kPi) * std::sin(kPi * q / tau));
      rate = r * (1.0 + std::cos(kPi * q / tau)) / 2.0;
    }
    return {seg.course0 + seg.dir * angle, seg.dir * rate};
  }

  // Sideslip angle and its rate: heading = course + sideslip.
  std::pair<double, double> sideslip(double t) const {
    double beta = 0.0, rate = 0.0;
    if (cfg_.sway_amplitude != 0.0) {
      const double w = 2.0 * kPi / cfg_.sway_period;
      beta += cfg_.sway_amplitude * std::sin(w * t + cfg_.sway_phase);
      rate += cfg_.sway_amplitude * w * std::cos(w * t + cfg_.sway_phase);
    }
    const Segment& seg = segment_at(t);
    if (seg.turn && cfg_.turn_sideslip != 0.0) {
      const double s = std::clamp(t - seg.t0, 0.0, turn_duration_);
      const double phase = kPi * s / turn_duration_;
      beta += seg.dir * cfg_.turn_sideslip * std::sin(phase) * std::sin(phase);
      rate += seg.dir * cfg_.turn_sideslip * kPi / turn_duration_ * std::sin(2.0 * phase);
    }
    return {beta, rate};
  }

  Vector3 velocity(double t) const {
    const double chi = course(t).first;
    return {cfg_.speed * std::cos(chi), cfg_.speed * std::sin(chi), 0.0};
  }

  // Segment boundaries inside (a, b), used to split quadrature intervals.
  void breakpoints(double a, double b, std::vector<double>& out) const {
    out.clear();
    out.push_back(a);
    for (const auto& seg : segments_) {
      if (!seg.turn) continue;
      const double marks[] = {seg.t0, seg.t0 + ramp_, seg.t0 + ramp_ + plateau_, seg.t1};
      for (double m : marks)
        if (m > a && m < b) out.push_back(m);
    }
    std::sort(out.begin() + 1, out.end());
    out.push_back(b);
  }

 private:
  TrajectoryConfig cfg_;
  double ramp_ = 0.0;
  double plateau_ = 0.0;
  double turn_duration_ = 0.0;
  std::vector<Segment> segments_;
};

// Five-point Gauss-Legendre on [a, b].
Vector3 integrate_velocity(const Kinematics& kin, double a, double b) {
  static constexpr std::array<double, 5> kNodes = {
      0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> kWeights = {
      0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
      0.2369268850561891};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Vector3 sum = Vector3::Zero();
  for (std::size_t i = 0; i < kNodes.size(); ++i) sum += kWeights[i] * kin.velocity(mid + half * kNodes[i]);
  return half * sum;
}

}  // namespace

void TrajectoryConfig::validate() const {
  require(finite_all({duration, imu_rate, speed, leg_length, turn_rate, turn_ramp, depth,
                      initial_heading, leg_phase, turn_sideslip, sway_amplitude, sway_period,
                      sway_phase}),
          "non-finite value");
  require(duration > 0.0, "duration must be positive");
  require(imu_rate > 0.0, "imu_rate must be positive");
  require(speed > 0.0, "speed must be positive");
  require(turn_rate > 0.0, "turn_rate must be positive");
  require(turn_ramp >= 0.0, "turn_ramp must be non-negative");
  require(leg_phase >= 0.0 && leg_phase < 1.0, "leg_phase must lie in [0, 1)");
  require(sway_period > 0.0, "sway_period must be positive");
  require(leg_length >= speed / imu_rate, "leg_length shorter than one sample of travel");
  require(kPi / turn_rate >= 2.0 / imu_rate, "turn shorter than two samples");
}

std::size_t TrajectoryConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration * imu_rate)) + 1;
}

std::vector<TrajectorySample> generate_lawnmower(const TrajectoryConfig& cfg) {
  cfg.validate();
  const Kinematics kin(cfg);
  const std::size_t n = cfg.sample_count();
  std::vector<TrajectorySample> out(n);
  std::vector<double> marks;
  Vector3 p(0.0, 0.0, cfg.depth);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / cfg.imu_rate;
    if (k > 0) {
      kin.breakpoints(out[k - 1].t, t, marks);
      for (std::size_t j = 0; j + 1 < marks.size(); ++j) p += integrate_velocity(kin, marks[j], marks[j + 1]);
    }
    const auto [chi, chi_rate] = kin.course(t);
    const auto [beta, beta_rate] = kin.sideslip(t);
    const double psi = chi + beta;

    TrajectorySample& s = out[k];
    s.t = t;
    s.p_n = p;
    s.v_n = Vector3(cfg.speed * std::cos(chi), cfg.speed * std::sin(chi), 0.0);
    s.r_nb = euler_to_rotmat({0.0, 0.0, psi});
    const Vector3 accel_n(-cfg.speed * chi_rate * std::sin(chi), cfg.speed * chi_rate * std::cos(chi), 0.0);
    s.f_b = s.r_nb.transpose() * (accel_n - gravity_ned());
    s.w_b = Vector3(0.0, 0.0, chi_rate + beta_rate);
  }
  return out;
}

IntegrationDefect integrate_check(const std::vector<TrajectorySample>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("integrate_check: need at least 3 samples");
  IntegrationDefect d;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const auto& a = samples[k];
    const auto& b = samples[k + 1];
    const double dt = b.t - a.t;
    const Vector3 dp = (b.p_n - a.p_n) / dt - 0.5 * (a.v_n + b.v_n);
    const Vector3 dv = (b.v_n - a.v_n) / dt - (a.r_nb * a.f_b + gravity_ned());
    d.position = std::max(d.position, dp.norm());
    d.velocity = std::max(d.velocity, dv.norm());
  }
  return d;
}

void TrajectoryRanges::validate() const {
  auto check = [](const Range& r, const char* name) {
    require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi,
            std::string("range ") + name + " must satisfy lo <= hi");
  };
  check(speed, "speed");
  check(turn_rate, "turn_rate");
  check(leg_length, "leg_length");
  check(initial_heading, "initial_heading");
  check(leg_phase, "leg_phase");
  check(turn_sideslip, "turn_sideslip");
  check(sway_amplitude, "sway_amplitude");
  check(sway_period, "sway_period");
  require(speed.lo > 0.0, "speed range must be positive");
  require(turn_rate.lo > 0.0, "turn_rate range must be positive");
  require(leg_phase.lo >= 0.0 && leg_phase.hi <= 1.0, "leg_phase range must lie in [0, 1]");
  require(sway_period.lo > 0.0, "sway_period range must be positive");
  require(duration > 0.0 && imu_rate > 0.0, "duration and imu_rate must be positive");
}

TrajectoryConfig sample_trajectory_config(const TrajectoryRanges& ranges, std::uint64_t seed) {
  ranges.validate();
  Rng rng = make_rng(seed, Stream::kTrajectory);
  auto draw = [&rng](const Range& r) { return r.lo == r.hi ? r.lo : uniform(rng, r.lo, r.hi); };
  TrajectoryConfig cfg;
  cfg.duration = ranges.duration;
  cfg.imu_rate = ranges.imu_rate;
  cfg.depth = ranges.depth;
  cfg.turn_ramp = ranges.turn_ramp;
  cfg.speed = draw(ranges.speed);
  cfg.turn_rate = draw(ranges.turn_rate);
  cfg.leg_length = draw(ranges.leg_length);
  cfg.initial_heading = draw(ranges.initial_heading);
  cfg.leg_phase = std::min(draw(ranges.leg_phase), std::nextafter(1.0, 0.0));
  cfg.first_turn_direction = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  cfg.turn_sideslip = draw(ranges.turn_sideslip);
  cfg.sway_amplitude = draw(ranges.sway_amplitude);
  cfg.sway_period = draw(ranges.sway_period);
  cfg.sway_phase = uniform(rng, 0.0, 2.0 * kPi);
  cfg.seed = seed;
  return cfg;
}

}  // namespace dvlalign
