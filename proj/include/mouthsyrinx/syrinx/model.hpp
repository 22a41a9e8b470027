#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mouthsyrinx/syrinx/config.hpp"
#include "mouthsyrinx/syrinx/delay_line.hpp"

namespace mouthsyrinx::syrinx {

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

struct ValveState {
  double x = 0.0;            // membrane displacement, m
  double x_vel = 0.0;        // m/s
  double u_flow = 0.0;       // m^3/s
  double p_bronchial = 0.0;  // p0, Pa
  double p_tracheal = 0.0;   // p1, Pa

  friend bool operator==(const ValveState&, const ValveState&) = default;
};

struct ValveStepResult {
  ValveState state;
  double tracheal_wave = 0.0;   // forward wave injected into the trachea
  double bronchial_wave = 0.0;  // backward wave sent toward the lung
};

double aperture(const ValveState& v, const ValveCoefficients& c);

// Quasi-static Bernoulli flow through the valve channels meeting at one
// tracheal junction. bronchial_in[i] is the wave arriving at valve i from its
// bronchus, tracheal_in the wave arriving from the trachea. Returns one flow
// per valve; solves the coupled junction exactly (closed form for one valve,
// scalar root on the summed flow for two).
std::array<double, 2> solve_junction(std::span<const double> apertures,
                                     std::span<const double> bronchial_in,
                                     double tracheal_in, const Coefficients& coeff,
                                     std::span<const ValveCoefficients> valves);

// Advance the membrane one explicit step given the junction pressures.
// Throws NumericalBlowup on non-finite results.
ValveState membrane_step(const ValveState& v, double u_flow, double p0, double p1,
                         const ValveCoefficients& c, double dt);

// One complete step for a single valve: junction solve plus membrane update.
ValveStepResult valve_step(const ValveState& v, double p_upstream, double p_downstream_incoming,
                           const Coefficients& coeff, double dt, std::size_t valve = 0);

struct BlowupEvent {
  std::uint64_t sample = 0;
  SyrinxControls controls;
  std::string what;
};

struct SyrinxState {
  std::array<ValveState, 2> valves{};
  CrossfadedDelay trachea_fwd;
  CrossfadedDelay trachea_bwd;
  std::array<DelayLine, 2> bronchus_fwd;  // lung -> valve
  std::array<DelayLine, 2> bronchus_bwd;  // valve -> lung
  double beak_filter = 0.0;
  double dc_in = 0.0;
  double dc_out = 0.0;
  SyrinxControls smoothed_controls;
  std::uint64_t sample_count = 0;
};

// Sample-rate syrinx: membrane valves between bronchus and trachea
// waveguides, terminated by a low-pass beak reflection.
class Syrinx {
 public:
  static constexpr std::size_t kBlockSize = 64;

  explicit Syrinx(SyrinxConfig config, const SyrinxControls& initial = {});

  // Returns one output sample in [-1, 1].
  double tick(const SyrinxControls& targets);
  void process_block(const SyrinxControls& targets, std::span<double> out);
  std::vector<double> process_block(const SyrinxControls& targets, std::size_t n);

  void reset(const SyrinxControls& controls = {});

  const SyrinxConfig& config() const { return config_; }
  const SyrinxState& state() const { return state_; }
  const Coefficients& coefficients() const { return coeff_; }

  // Clamps every membrane at rest; the channels still pass flow.
  void freeze_membrane(bool frozen) { frozen_ = frozen; }
  // Adds a pressure value to the tracheal forward wave written on the next tick.
  void inject_tracheal_wave(double value) { pending_injection_ += value; }
  // Wave that arrived at the valve end of the trachea on the last tick.
  double last_tracheal_arrival() const { return last_tracheal_arrival_; }

  // Set when the last tick hit a non-finite state; cleared by take_blowup().
  std::optional<BlowupEvent> take_blowup();
  std::size_t blowup_count() const { return blowup_count_; }

 private:
  void update_geometry(bool initial);
  void advance_controls(const SyrinxControls& targets);
  double step_unchecked();
  void handle_blowup(const std::string& what);

  SyrinxConfig config_;
  Coefficients coeff_;
  SyrinxState state_;
  double smoothing_coeff_ = 0.0;
  std::size_t max_trachea_delay_ = 1;
  std::size_t mute_remaining_ = 0;
  std::size_t blowup_count_ = 0;
  std::optional<BlowupEvent> blowup_;
  bool frozen_ = false;
  double pending_injection_ = 0.0;
  double last_tracheal_arrival_ = 0.0;
};

}  // namespace mouthsyrinx::syrinx
