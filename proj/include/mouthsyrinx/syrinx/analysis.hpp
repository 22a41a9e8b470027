#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mouthsyrinx/syrinx/config.hpp"

namespace mouthsyrinx::syrinx {

class TooShort : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kMinPitchSamples = 4096;

struct PitchEstimate {
  double f0 = 0.0;           // Hz
  double confidence = 0.0;   // normalized autocorrelation at the chosen lag
};

// Autocorrelation f0 over the whole window. Returns nullopt (unvoiced) when
// the best normalized autocorrelation peak is below 0.5. Throws TooShort
// below kMinPitchSamples.
std::optional<PitchEstimate> estimate_pitch(std::span<const double> samples, double sample_rate);

double rms(std::span<const double> samples);

// Magnitude of the Hann-windowed DFT at an arbitrary frequency.
double spectral_magnitude(std::span<const double> samples, double sample_rate, double freq);

enum class Regime { silent, periodic, period_doubled, aperiodic };

std::string_view to_string(Regime r);

struct RegimeCell {
  double pressure = 0.0;
  double tension = 0.0;
  Regime regime = Regime::silent;
  double f0 = 0.0;
  double rms = 0.0;
  bool blew_up = false;
};

// Classifies an analysis window (transient already discarded).
Regime classify(std::span<const double> samples, double sample_rate, double* f0_out = nullptr);

struct ScanOptions {
  double render_seconds = 1.0;
  double discard_seconds = 0.5;
};

// Renders one cell: fixed controls from rest, transient discarded, classified.
RegimeCell render_cell(const SyrinxConfig& config, const SyrinxControls& controls,
                       const ScanOptions& options = {});

// Row-major grid: one row per pressure, one column per tension. Tensions
// drive both valves.
std::vector<RegimeCell> stability_scan(const SyrinxConfig& config,
                                       std::span<const double> pressure_grid,
                                       std::span<const double> tension_grid,
                                       const SyrinxControls& base = {},
                                       const ScanOptions& options = {});

// Bisection on lung pressure between a silent `low` and an oscillating
// `high` until the bracket is narrower than `tolerance` Pa; returns the upper
// end of the final bracket. Throws ConfigError if the bracket is not valid.
double onset_pressure(const SyrinxConfig& config, const SyrinxControls& base, double low,
                      double high, double tolerance, const ScanOptions& options = {});

// Evenly spaced grid a..b with n points (n == 1 yields {a}).
std::vector<double> linear_grid(double a, double b, std::size_t n);

}  // namespace mouthsyrinx::syrinx
