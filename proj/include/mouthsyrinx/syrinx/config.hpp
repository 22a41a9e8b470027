#pragma once

#include <array>
#include <cstddef>

#include "mouthsyrinx/errors.hpp"

namespace mouthsyrinx::syrinx {

struct MembraneParams {
  double mass = 5e-6;           // kg
  double rest_gap = 5e-4;       // h0, m
  double width = 3e-3;          // w, m
  double damping_ratio = 0.05;  // zeta
  double f_ref = 600.0;         // Hz at t_ref
  double t_ref = 100.0;         // N/m
  double drive_area = 1e-3;     // m^2, area the channel pressure acts on
  friend bool operator==(const MembraneParams&, const MembraneParams&) = default;
};

struct AirParams {
  double rho = 1.2;   // kg/m^3
  double c = 347.0;   // m/s
  friend bool operator==(const AirParams&, const AirParams&) = default;
};

// Anatomy and numerics of one syrinx instance. Defaults are songbird-scale
// engineering choices; every field can be overridden from the engine config.
struct SyrinxConfig {
  double sample_rate = 44100.0;
  int n_valves = 1;
  double trachea_length = 0.07;
  double trachea_radius = 0.0035;
  double bronchus_length = 0.02;
  double bronchus_radius = 0.0025;
  MembraneParams membrane;
  AirParams air;
  double beak_reflection = 0.85;
  double beak_pole = 0.6;
  double lung_reflection = 0.7;
  double h_min = 1e-5;
  double output_gain = 0.04;
  double smoothing_ms = 10.0;

  // Throws ConfigError naming the first field outside its valid range.
  void validate() const;
  friend bool operator==(const SyrinxConfig&, const SyrinxConfig&) = default;
};

// Live performance controls. Targets are smoothed inside the model.
struct SyrinxControls {
  double p_lung = 0.0;               // Pa
  double tension_left = 100.0;       // N/m
  double tension_right = 100.0;      // N/m, ignored with one valve
  double trachea_length_scale = 1.0;
  double trachea_radius_scale = 1.0;

  void validate() const;
  friend bool operator==(const SyrinxControls&, const SyrinxControls&) = default;
};

inline constexpr double kMinGeometryScale = 0.5;
inline constexpr double kMaxGeometryScale = 2.0;

struct ValveCoefficients {
  double omega = 0.0;          // rad/s
  double damping = 0.0;        // 2 zeta omega
  double drive_per_mass = 0.0; // A_m / m
  double rest_gap = 0.0;
  double h_min = 0.0;
  double width = 0.0;
  double rho = 0.0;
  double flow_gain = 0.0;      // w * sqrt(2 / rho): U = flow_gain * h * sqrt(|dp|)
};

struct Coefficients {
  std::size_t trachea_delay = 1;   // one-way, samples
  std::size_t bronchus_delay = 1;  // one-way, samples
  double z_trachea = 0.0;          // rho c / area
  double z_bronchus = 0.0;
  std::array<ValveCoefficients, 2> valves{};
  double beak_reflection = 0.0;
  double beak_pole = 0.0;
  double lung_reflection = 0.0;
  double output_gain = 0.0;
  double dt = 0.0;
};

double tension_to_omega(const MembraneParams& membrane, double tension);

// One-way waveguide delay for a tube: round(fs * length / c).
std::size_t tube_delay(double sample_rate, double length, double c);

// Throws ConfigError if any derived delay is below one sample.
Coefficients derive_coefficients(const SyrinxConfig& config, const SyrinxControls& controls);

}  // namespace mouthsyrinx::syrinx
