#include "mouthsyrinx/syrinx/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mouthsyrinx::syrinx {

namespace {

// Positive root s of s^2 + zc*s - p = 0 (p >= 0), in the cancellation-free form.
double bernoulli_root(double p, double zc) {
  if (p <= 0.0) return 0.0;
  return 2.0 * p / (zc + std::sqrt(zc * zc + 4.0 * p));
}

// Flow through one channel of conductance c = flow_gain * h fed by net
// pressure drive p through a series impedance z.
double loaded_flow(double p, double z, double c) {
  const double s = bernoulli_root(std::abs(p), z * c);
  return std::copysign(c * s, p);
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalBlowup(std::string("non-finite ") + what);
}

}  // namespace

double aperture(const ValveState& v, const ValveCoefficients& c) {
  return std::max(c.rest_gap + v.x, c.h_min);
}

std::array<double, 2> solve_junction(std::span<const double> apertures,
                                     std::span<const double> bronchial_in, double tracheal_in,
                                     const Coefficients& coeff,
                                     std::span<const ValveCoefficients> valves) {
  std::array<double, 2> flows{};
  const std::size_t n = apertures.size();
  if (n == 1) {
    const double c = valves[0].flow_gain * apertures[0];
    flows[0] = loaded_flow(bronchial_in[0] - tracheal_in, coeff.z_bronchus + coeff.z_trachea, c);
    return flows;
  }

  // Each valve's flow given the summed tracheal flow s is a closed form and
  // decreasing in s, so g(s) = sum(U_i(s)) - s has a single root.
  auto flows_for = [&](double s) {
    std::array<double, 2> u{};
    for (std::size_t i = 0; i < n; ++i) {
      const double c = valves[i].flow_gain * apertures[i];
      u[i] = loaded_flow(bronchial_in[i] - tracheal_in - coeff.z_trachea * s, coeff.z_bronchus, c);
    }
    return u;
  };
  auto g = [&](double s) {
    const auto u = flows_for(s);
    return u[0] + u[1] - s;
  };

  const double g0 = g(0.0);
  double lo = std::min(0.0, g0);
  double hi = std::max(0.0, g0);
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo == 0.0) return flows_for(lo);
  if (g_hi == 0.0) return flows_for(hi);
  // Illinois false position; falls back to bisection steps when stalled.
  int side = 0;
  double s = 0.5 * (lo + hi);
  for (int iter = 0; iter < 100; ++iter) {
    s = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double gs = g(s);
    if (gs == 0.0 || (hi - lo) <= 1e-15 * std::max(1e-12, std::abs(s))) break;
    if ((gs > 0.0) == (g_lo > 0.0)) {
      lo = s;
      g_lo = gs;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = s;
      g_hi = gs;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
  }
  return flows_for(s);
}

ValveState membrane_step(const ValveState& v, double u_flow, double p0, double p1,
                         const ValveCoefficients& c, double dt) {
  const double h = aperture(v, c);
  const double particle_velocity = u_flow / (c.width * h);
  const double p_bern = 0.5 * c.rho * particle_velocity * particle_velocity;
  const double drive = c.drive_per_mass * (0.5 * (p0 + p1) - p_bern);
  const double accel = -c.damping * v.x_vel - c.omega * c.omega * v.x + drive;

  ValveState next;
  next.x_vel = v.x_vel + accel * dt;
  next.x = v.x + next.x_vel * dt;
  next.u_flow = u_flow;
  next.p_bronchial = p0;
  next.p_tracheal = p1;

  check_finite(next.x, "membrane displacement");
  check_finite(next.x_vel, "membrane velocity");
  check_finite(next.u_flow, "flow");
  check_finite(next.p_bronchial, "bronchial pressure");
  check_finite(next.p_tracheal, "tracheal pressure");
  return next;
}

ValveStepResult valve_step(const ValveState& v, double p_upstream, double p_downstream_incoming,
                           const Coefficients& coeff, double dt, std::size_t valve) {
  const auto& vc = coeff.valves.at(valve);
  const double h = aperture(v, vc);
  const double u = solve_junction(std::span(&h, 1), std::span(&p_upstream, 1),
                                  p_downstream_incoming, coeff, std::span(&vc, 1))[0];
  const double bronchial_wave = -coeff.z_bronchus * u;
  const double tracheal_wave = coeff.z_trachea * u;
  const double p0 = p_upstream + bronchial_wave;
  const double p1 = p_downstream_incoming + tracheal_wave;

  ValveStepResult r;
  r.state = membrane_step(v, u, p0, p1, vc, dt);
  r.tracheal_wave = tracheal_wave;
  r.bronchial_wave = bronchial_wave;
  return r;
}

Syrinx::Syrinx(SyrinxConfig config, const SyrinxControls& initial) : config_(std::move(config)) {
  coeff_ = derive_coefficients(config_, initial);
  const double tau = config_.smoothing_ms * 1e-3;
  smoothing_coeff_ = tau > 0.0 ? std::exp(-1.0 / (tau * config_.sample_rate)) : 0.0;

  SyrinxControls longest = initial;
  longest.trachea_length_scale = kMaxGeometryScale;
  max_trachea_delay_ = derive_coefficients(config_, longest).trachea_delay + 1;
  reset(initial);
}

void Syrinx::reset(const SyrinxControls& controls) {
  coeff_ = derive_coefficients(config_, controls);
  state_ = SyrinxState{};
  state_.smoothed_controls = controls;
  state_.trachea_fwd = CrossfadedDelay(max_trachea_delay_, coeff_.trachea_delay, kBlockSize);
  state_.trachea_bwd = CrossfadedDelay(max_trachea_delay_, coeff_.trachea_delay, kBlockSize);
  for (auto& line : state_.bronchus_fwd) line = DelayLine(coeff_.bronchus_delay);
  for (auto& line : state_.bronchus_bwd) line = DelayLine(coeff_.bronchus_delay);
  mute_remaining_ = 0;
  blowup_.reset();
  pending_injection_ = 0.0;
  last_tracheal_arrival_ = 0.0;
}

void Syrinx::advance_controls(const SyrinxControls& t) {
  auto& s = state_.smoothed_controls;
  const double a = smoothing_coeff_;
  auto follow = [a](double& value, double target) { value = target + a * (value - target); };
  follow(s.p_lung, t.p_lung);
  follow(s.tension_left, t.tension_left);
  follow(s.tension_right, t.tension_right);
  follow(s.trachea_length_scale, t.trachea_length_scale);
  follow(s.trachea_radius_scale, t.trachea_radius_scale);
}

void Syrinx::update_geometry(bool initial) {
  const auto& s = state_.smoothed_controls;
  const double length = config_.trachea_length * s.trachea_length_scale;
  const std::size_t delay =
      std::clamp<std::size_t>(tube_delay(config_.sample_rate, length, config_.air.c), 1,
                              max_trachea_delay_);
  const double radius = config_.trachea_radius * s.trachea_radius_scale;
  coeff_.z_trachea = config_.air.rho * config_.air.c / (std::numbers::pi * radius * radius);
  if (delay != coeff_.trachea_delay || initial) {
    coeff_.trachea_delay = delay;
    state_.trachea_fwd.set_delay(delay);
    state_.trachea_bwd.set_delay(delay);
  }
}

double Syrinx::step_unchecked() {
  auto& st = state_;
  const std::size_t n = static_cast<std::size_t>(config_.n_valves);
  const auto& sc = st.smoothed_controls;
  const double tensions[2] = {sc.tension_left, sc.tension_right};
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = coeff_.valves[i];
    v.omega = tension_to_omega(config_.membrane, tensions[i]);
    v.damping = 2.0 * config_.membrane.damping_ratio * v.omega;
  }

  // Reads first: every line delivers what was pushed `delay` ticks ago.
  const double tracheal_in = st.trachea_bwd.read();
  const double beak_in = st.trachea_fwd.read();
  std::array<double, 2> bronchial_in{};
  std::array<double, 2> lung_in{};
  std::array<double, 2> apertures{};
  for (std::size_t i = 0; i < n; ++i) {
    bronchial_in[i] = st.bronchus_fwd[i].read(coeff_.bronchus_delay);
    lung_in[i] = st.bronchus_bwd[i].read(coeff_.bronchus_delay);
    apertures[i] = aperture(st.valves[i], coeff_.valves[i]);
  }
  last_tracheal_arrival_ = tracheal_in;

  const auto flows = solve_junction(std::span(apertures.data(), n),
                                    std::span(bronchial_in.data(), n), tracheal_in, coeff_,
                                    std::span(coeff_.valves.data(), n));
  double total_flow = 0.0;
  for (std::size_t i = 0; i < n; ++i) total_flow += flows[i];
  const double tracheal_wave = coeff_.z_trachea * total_flow;
  const double p1 = tracheal_in + tracheal_wave;

  for (std::size_t i = 0; i < n; ++i) {
    const double bronchial_wave = -coeff_.z_bronchus * flows[i];
    const double p0 = bronchial_in[i] + bronchial_wave;
    if (frozen_) {
      st.valves[i] = ValveState{0.0, 0.0, flows[i], p0, p1};
    } else {
      st.valves[i] = membrane_step(st.valves[i], flows[i], p0, p1, coeff_.valves[i], coeff_.dt);
    }
    st.bronchus_fwd[i].push(sc.p_lung + coeff_.lung_reflection * lung_in[i]);
    st.bronchus_bwd[i].push(bronchial_wave);
  }

  st.trachea_fwd.push(tracheal_wave + pending_injection_);
  pending_injection_ = 0.0;

  // Beak: one-pole low-pass; the reflected part returns inverted, the rest radiates.
  st.beak_filter = (1.0 - coeff_.beak_pole) * beak_in + coeff_.beak_pole * st.beak_filter;
  st.trachea_bwd.push(-coeff_.beak_reflection * st.beak_filter);
  const double radiated = (1.0 - coeff_.beak_reflection) * st.beak_filter;

  // DC blocker (20 Hz) so steady flow does not show up as an output offset.
  const double r = std::exp(-2.0 * std::numbers::pi * 20.0 / config_.sample_rate);
  const double blocked = radiated - st.dc_in + r * st.dc_out;
  st.dc_in = radiated;
  st.dc_out = blocked;
  check_finite(blocked, "output");

  // Valve flows sum at the junction; keep the level independent of the valve count.
  return std::clamp(coeff_.output_gain * blocked / static_cast<double>(n), -1.0, 1.0);
}

void Syrinx::handle_blowup(const std::string& what) {
  const SyrinxControls controls = state_.smoothed_controls;
  const std::uint64_t at = state_.sample_count;
  state_.valves = {};
  state_.trachea_fwd.clear();
  state_.trachea_bwd.clear();
  for (auto& line : state_.bronchus_fwd) line.clear();
  for (auto& line : state_.bronchus_bwd) line.clear();
  state_.beak_filter = state_.dc_in = state_.dc_out = 0.0;
  pending_injection_ = 0.0;
  mute_remaining_ = static_cast<std::size_t>(std::lround(0.05 * config_.sample_rate));
  ++blowup_count_;
  blowup_ = BlowupEvent{at, controls, what};
}

double Syrinx::tick(const SyrinxControls& targets) {
  advance_controls(targets);
  if (state_.sample_count % kBlockSize == 0) update_geometry(false);

  double out = 0.0;
  if (mute_remaining_ > 0) {
    --mute_remaining_;
  } else {
    try {
      out = step_unchecked();
    } catch (const NumericalBlowup& e) {
      handle_blowup(e.what());
      out = 0.0;
    }
  }
  ++state_.sample_count;
  return out;
}

void Syrinx::process_block(const SyrinxControls& targets, std::span<double> out) {
  for (double& s : out) s = tick(targets);
}

std::vector<double> Syrinx::process_block(const SyrinxControls& targets, std::size_t n) {
  std::vector<double> out(n);
  process_block(targets, std::span<double>(out));
  return out;
}

std::optional<BlowupEvent> Syrinx::take_blowup() {
  auto e = std::move(blowup_);
  blowup_.reset();
  return e;
}

}  // namespace mouthsyrinx::syrinx
