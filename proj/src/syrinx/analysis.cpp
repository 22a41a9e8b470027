#include "mouthsyrinx/syrinx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "mouthsyrinx/syrinx/model.hpp"

namespace mouthsyrinx::syrinx {

namespace {

constexpr double kVoicingThreshold = 0.5;
constexpr double kLowestPitchHz = 40.0;
constexpr double kSilenceRms = 1e-4;

}  // namespace

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::optional<PitchEstimate> estimate_pitch(std::span<const double> samples, double sample_rate) {
  if (samples.size() < kMinPitchSamples) {
    throw TooShort("estimate_pitch needs at least " + std::to_string(kMinPitchSamples) +
                   " samples, got " + std::to_string(samples.size()));
  }
  const std::size_t n = samples.size();
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  std::transform(samples.begin(), samples.end(), x.begin(), [mean](double s) { return s - mean; });

  // Running energies of the leading and trailing segments for normalization.
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  if (prefix[n] <= 1e-300) return std::nullopt;

  const std::size_t max_lag =
      std::min<std::size_t>(n / 2, static_cast<std::size_t>(sample_rate / kLowestPitchHz));
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = 1; lag <= max_lag + 1 && lag < n; ++lag) {
    double acc = 0.0;
    const std::size_t m = n - lag;
    for (std::size_t t = 0; t < m; ++t) acc += x[t] * x[t + lag];
    const double e0 = prefix[m];
    const double e1 = prefix[n] - prefix[lag];
    const double denom = std::sqrt(e0 * e1);
    r[lag] = denom > 0.0 ? acc / denom : 0.0;
  }

  std::size_t start = 1;
  while (start <= max_lag && r[start] >= 0.0) ++start;
  if (start > max_lag) return std::nullopt;

  double best = -1.0;
  for (std::size_t lag = start; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  if (best < kVoicingThreshold) return std::nullopt;

  // Shortest lag whose peak is close to the best one avoids octave-down picks.
  std::size_t chosen = 0;
  for (std::size_t lag = start; lag <= max_lag; ++lag) {
    const bool peak = r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1];
    if (peak && r[lag] >= 0.9 * best) {
      chosen = lag;
      break;
    }
  }
  if (chosen == 0) return std::nullopt;

  double offset = 0.0;
  const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
  const double curvature = a - 2.0 * b + c;
  if (curvature < 0.0) offset = 0.5 * (a - c) / curvature;
  const double lag = static_cast<double>(chosen) + std::clamp(offset, -0.5, 0.5);
  return PitchEstimate{sample_rate / lag, b};
}

double spectral_magnitude(std::span<const double> samples, double sample_rate, double freq) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t t = 0; t < n; ++t) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n - 1));
    acc += hann * samples[t] * std::polar(1.0, -w * static_cast<double>(t));
  }
  return std::abs(acc);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::silent: return "silent";
    case Regime::periodic: return "periodic";
    case Regime::period_doubled: return "period-doubled";
    case Regime::aperiodic: return "aperiodic";
  }
  return "unknown";
}

Regime classify(std::span<const double> samples, double sample_rate, double* f0_out) {
  if (f0_out) *f0_out = 0.0;
  if (rms(samples) < kSilenceRms) return Regime::silent;
  const auto pitch = estimate_pitch(samples, sample_rate);
  if (!pitch) return Regime::aperiodic;
  if (f0_out) *f0_out = pitch->f0;
  // The autocorrelation period of a period-doubled tone is already the long
  // one, so the oscillation peak may sit at twice the estimated f0.
  const double within_3db = std::pow(10.0, -3.0 / 20.0);
  const double at_f0 = spectral_magnitude(samples, sample_rate, pitch->f0);
  const double at_2f0 = spectral_magnitude(samples, sample_rate, 2.0 * pitch->f0);
  if (at_2f0 > at_f0) {
    if (at_f0 >= within_3db * at_2f0) return Regime::period_doubled;
    return Regime::periodic;
  }
  const double at_half = spectral_magnitude(samples, sample_rate, 0.5 * pitch->f0);
  if (at_f0 > 0.0 && at_half >= within_3db * at_f0) return Regime::period_doubled;
  return Regime::periodic;
}

RegimeCell render_cell(const SyrinxConfig& config, const SyrinxControls& controls,
                       const ScanOptions& options) {
  SyrinxControls rest = controls;
  rest.p_lung = 0.0;
  Syrinx syrinx(config, rest);

  const auto total = static_cast<std::size_t>(std::lround(options.render_seconds * config.sample_rate));
  const auto discard =
      std::min(total, static_cast<std::size_t>(std::lround(options.discard_seconds * config.sample_rate)));
  const auto samples = syrinx.process_block(controls, total);
  const std::span<const double> tail(samples.data() + discard, total - discard);

  RegimeCell cell;
  cell.pressure = controls.p_lung;
  cell.tension = controls.tension_left;
  cell.rms = rms(tail);
  cell.blew_up = syrinx.blowup_count() > 0;
  if (cell.blew_up) {
    cell.regime = Regime::aperiodic;
  } else if (tail.size() < kMinPitchSamples) {
    cell.regime = cell.rms < kSilenceRms ? Regime::silent : Regime::aperiodic;
  } else {
    cell.regime = classify(tail, config.sample_rate, &cell.f0);
  }
  return cell;
}

std::vector<RegimeCell> stability_scan(const SyrinxConfig& config,
                                       std::span<const double> pressure_grid,
                                       std::span<const double> tension_grid,
                                       const SyrinxControls& base, const ScanOptions& options) {
  if (pressure_grid.empty() || tension_grid.empty()) {
    throw ConfigError("stability_scan: pressure and tension grids must be non-empty");
  }
  std::vector<RegimeCell> cells;
  cells.reserve(pressure_grid.size() * tension_grid.size());
  for (double p : pressure_grid) {
    for (double t : tension_grid) {
      SyrinxControls c = base;
      c.p_lung = p;
      c.tension_left = t;
      c.tension_right = t;
      cells.push_back(render_cell(config, c, options));
    }
  }
  return cells;
}

namespace {

bool oscillates(const RegimeCell& cell) {
  return cell.regime == Regime::periodic || cell.regime == Regime::period_doubled;
}

}  // namespace

double onset_pressure(const SyrinxConfig& config, const SyrinxControls& base, double low,
                      double high, double tolerance, const ScanOptions& options) {
  if (!(low >= 0.0 && low < high && tolerance > 0.0)) {
    throw ConfigError("onset_pressure: need 0 <= low < high and a positive tolerance");
  }
  auto cell_at = [&](double p) {
    SyrinxControls c = base;
    c.p_lung = p;
    return render_cell(config, c, options);
  };
  if (oscillates(cell_at(low))) throw ConfigError("onset_pressure: low end already oscillates");
  if (!oscillates(cell_at(high))) throw ConfigError("onset_pressure: high end does not oscillate");
  while (high - low > tolerance) {
    const double mid = 0.5 * (low + high);
    (oscillates(cell_at(mid)) ? high : low) = mid;
  }
  return high;
}

std::vector<double> linear_grid(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

}  // namespace mouthsyrinx::syrinx
