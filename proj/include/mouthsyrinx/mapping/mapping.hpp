#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mouthsyrinx/errors.hpp"
#include "mouthsyrinx/syrinx/config.hpp"
#include "mouthsyrinx/vision/mouth.hpp"

namespace mouthsyrinx::mapping {

class EmptyCapture : public Error {
 public:
  using Error::Error;
};

enum class Feature { area, height, width, aspect, cx, cy };
inline constexpr std::size_t kFeatureCount = 6;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures{
    Feature::area, Feature::height, Feature::width, Feature::aspect, Feature::cx, Feature::cy};

std::string_view to_string(Feature f);
Feature parse_feature(std::string_view name);  // throws ConfigError

double feature_value(const vision::MouthFeatures& f, Feature which);

enum class TargetKind { p_lung, tension_left, tension_right, trachea_length_scale, trachea_radius_scale, midi_cc };

struct Target {
  TargetKind kind = TargetKind::p_lung;
  int cc = 0;  // only for midi_cc
  friend bool operator==(const Target&, const Target&) = default;
};

std::string to_string(const Target& t);   // "p_lung", ..., "cc:74"
Target parse_target(std::string_view name);

enum class Curve { linear, exponential };
std::string_view to_string(Curve c);
Curve parse_curve(std::string_view name);

struct MapRoute {
  Feature source = Feature::area;
  Target target;
  double out_min = 0.0;
  double out_max = 1.0;
  Curve curve = Curve::linear;
  double smoothing_ms = 0.0;
  bool invert = false;  // maps n to 1 - n before the curve

  // Throws ConfigError: out_min < out_max, cc in [0, 127], exponential needs out_min > 0.
  void validate() const;
  friend bool operator==(const MapRoute&, const MapRoute&) = default;
};

// Rejects invalid routes and more than one route per syrinx target.
void validate_routes(std::span<const MapRoute> routes);

struct FeatureRange {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

struct Calibration {
  std::array<FeatureRange, kFeatureCount> ranges = default_ranges();

  static std::array<FeatureRange, kFeatureCount> default_ranges();
  FeatureRange& operator[](Feature f) { return ranges[static_cast<std::size_t>(f)]; }
  const FeatureRange& operator[](Feature f) const { return ranges[static_cast<std::size_t>(f)]; }
  void validate() const;
  friend bool operator==(const Calibration&, const Calibration&) = default;
};

using Normalized = std::array<double, kFeatureCount>;

Normalized normalize(const vision::MouthFeatures& features, const Calibration& cal);

// Output of one route for a normalized input in [0, 1].
double route_output(const MapRoute& route, double n);
// floor(n * 127 + 0.5), n clamped to [0, 1].
int midi_value(double n);

struct ControlFrame {
  std::uint64_t seq = 0;
  double time_s = 0.0;
  syrinx::SyrinxControls syrinx;
  std::vector<std::pair<int, int>> midi;  // (cc number, value)
};

// Pure routing; unrouted syrinx targets keep the values in `defaults`.
ControlFrame apply_routes(const Normalized& n, std::span<const MapRoute> routes,
                          const syrinx::SyrinxControls& defaults);

struct TimedFeatures {
  double time_s = 0.0;
  vision::MouthFeatures features;
};

inline constexpr double kCalibrationMargin = 0.05;
inline constexpr double kMinCalibrationSpread = 1e-6;

// Min/max of each feature over the first duration_s of the stream, widened by
// 5% of the spread on both ends. Features without spread keep their defaults.
Calibration calibrate_capture(std::span<const TimedFeatures> stream, double duration_s);

// Stateful mapper: routing plus per-route one-pole smoothing at frame rate.
class Mapper {
 public:
  Mapper(std::vector<MapRoute> routes, Calibration cal, syrinx::SyrinxControls defaults);

  ControlFrame map(const vision::MouthFeatures& features, std::uint64_t seq, double time_s);

  const std::vector<MapRoute>& routes() const { return routes_; }
  const Calibration& calibration() const { return cal_; }
  const syrinx::SyrinxControls& defaults() const { return defaults_; }
  // Replaces the route with the same target or appends it.
  void set_route(const MapRoute& route);
  void set_calibration(const Calibration& cal);

 private:
  std::vector<MapRoute> routes_;
  Calibration cal_;
  syrinx::SyrinxControls defaults_;
  std::vector<std::optional<double>> smoothed_;
  std::optional<double> last_time_;
};

}  // namespace mouthsyrinx::mapping
