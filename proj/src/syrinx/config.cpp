#include "mouthsyrinx/syrinx/config.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mouthsyrinx::syrinx {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("syrinx: " + what);
}

double tube_impedance(const AirParams& air, double radius) {
  return air.rho * air.c / (std::numbers::pi * radius * radius);
}

}  // namespace

void SyrinxConfig::validate() const {
  require(sample_rate > 0, "sample_rate must be positive");
  require(n_valves == 1 || n_valves == 2, "n_valves must be 1 or 2");
  require(trachea_length > 0 && trachea_radius > 0, "trachea dimensions must be positive");
  require(bronchus_length > 0 && bronchus_radius > 0, "bronchus dimensions must be positive");
  require(membrane.mass > 0, "membrane.mass must be positive");
  require(membrane.rest_gap > 0, "membrane.rest_gap must be positive");
  require(membrane.width > 0, "membrane.width must be positive");
  require(membrane.damping_ratio > 0 && membrane.damping_ratio < 1,
          "membrane.damping_ratio must be in (0, 1)");
  require(membrane.f_ref > 0 && membrane.t_ref > 0, "membrane.f_ref and t_ref must be positive");
  require(membrane.drive_area > 0, "membrane.drive_area must be positive");
  require(air.rho > 0 && air.c > 0, "air.rho and air.c must be positive");
  require(beak_reflection > 0 && beak_reflection < 1, "beak_reflection must be in (0, 1)");
  require(beak_pole >= 0 && beak_pole < 1, "beak_pole must be in [0, 1)");
  require(lung_reflection >= 0 && lung_reflection < 1, "lung_reflection must be in [0, 1)");
  require(h_min > 0, "h_min must be positive");
  require(output_gain > 0, "output_gain must be positive");
  require(smoothing_ms >= 0, "smoothing_ms must be non-negative");
}

void SyrinxControls::validate() const {
  require(p_lung >= 0, "p_lung must be non-negative");
  require(tension_left > 0 && tension_right > 0, "tensions must be positive");
  auto scale_ok = [](double s) { return s >= kMinGeometryScale && s <= kMaxGeometryScale; };
  require(scale_ok(trachea_length_scale), "trachea_length_scale must be in [0.5, 2]");
  require(scale_ok(trachea_radius_scale), "trachea_radius_scale must be in [0.5, 2]");
}

double tension_to_omega(const MembraneParams& membrane, double tension) {
  return 2.0 * std::numbers::pi * membrane.f_ref * std::sqrt(tension / membrane.t_ref);
}

std::size_t tube_delay(double sample_rate, double length, double c) {
  return static_cast<std::size_t>(std::lround(sample_rate * length / c));
}

Coefficients derive_coefficients(const SyrinxConfig& config, const SyrinxControls& controls) {
  config.validate();
  controls.validate();

  Coefficients k;
  k.dt = 1.0 / config.sample_rate;
  k.trachea_delay = tube_delay(config.sample_rate,
                               config.trachea_length * controls.trachea_length_scale,
                               config.air.c);
  k.bronchus_delay = tube_delay(config.sample_rate, config.bronchus_length, config.air.c);
  require(k.trachea_delay >= 1, "trachea delay rounds below one sample");
  require(k.bronchus_delay >= 1, "bronchus delay rounds below one sample");

  k.z_trachea = tube_impedance(config.air, config.trachea_radius * controls.trachea_radius_scale);
  k.z_bronchus = tube_impedance(config.air, config.bronchus_radius);

  const auto& m = config.membrane;
  const double tensions[2] = {controls.tension_left, controls.tension_right};
  for (std::size_t i = 0; i < k.valves.size(); ++i) {
    auto& v = k.valves[i];
    v.omega = tension_to_omega(m, tensions[i]);
    v.damping = 2.0 * m.damping_ratio * v.omega;
    v.drive_per_mass = m.drive_area / m.mass;
    v.rest_gap = m.rest_gap;
    v.h_min = config.h_min;
    v.width = m.width;
    v.rho = config.air.rho;
    v.flow_gain = m.width * std::sqrt(2.0 / config.air.rho);
  }

  k.beak_reflection = config.beak_reflection;
  k.beak_pole = config.beak_pole;
  k.lung_reflection = config.lung_reflection;
  k.output_gain = config.output_gain;
  return k;
}

}  // namespace mouthsyrinx::syrinx
