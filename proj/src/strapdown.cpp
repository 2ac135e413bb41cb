#include "dvlalign/strapdown.hpp"

#include <algorithm>
#include <stdexcept>

namespace dvlalign {

NavState strapdown_step(const NavState& state, const Vector3& f_b, const Vector3& w_b, double dt) {
  NavState next;
  next.t = state.t + dt;
  const RotationMatrix r_mid = state.r_nb * rodrigues(0.5 * dt * w_b);
  next.r_nb = orthonormalize(state.r_nb * rodrigues(dt * w_b));
  next.v_n = state.v_n + (r_mid * f_b + gravity_ned()) * dt;
  next.p_n = state.p_n + 0.5 * (state.v_n + next.v_n) * dt;
  return next;
}

NavState initial_state_from(const TrajectorySample& s) {
  return {s.t, s.p_n, s.v_n, s.r_nb};
}

InsRun ins_body_velocity(const std::vector<TrajectorySample>& samples, const NavState& init,
                         const ImuErrorConfig& err, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("ins_body_velocity: empty stream");
  InsRun run;
  run.body_velocity.reserve(samples.size());
  NavState state = init;
  state.t = samples.front().t;
  run.body_velocity.push_back({state.t, state.r_nb.transpose() * state.v_n});

  ImuMeasurement prev = imu_measure(samples[0].f_b, samples[0].w_b, err, rng);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const ImuMeasurement cur = imu_measure(samples[k].f_b, samples[k].w_b, err, rng);
    const double dt = samples[k].t - samples[k - 1].t;
    state = strapdown_step(state, 0.5 * (prev.f_b + cur.f_b), 0.5 * (prev.w_b + cur.w_b), dt);
    state.t = samples[k].t;
    run.max_orthonormality_defect = std::max(run.max_orthonormality_defect, orthonormality_defect(state.r_nb));
    run.body_velocity.push_back({state.t, state.r_nb.transpose() * state.v_n});
    prev = cur;
  }
  run.final_state = state;
  return run;
}

}  // namespace dvlalign
