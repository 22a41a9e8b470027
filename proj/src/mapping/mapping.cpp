#include "mouthsyrinx/mapping/mapping.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace mouthsyrinx::mapping {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{"area", "height", "width", "aspect", "cx", "cy"};

struct TargetName {
  TargetKind kind;
  std::string_view name;
};
constexpr std::array<TargetName, 5> kSyrinxTargets{{
    {TargetKind::p_lung, "p_lung"},
    {TargetKind::tension_left, "tension_left"},
    {TargetKind::tension_right, "tension_right"},
    {TargetKind::trachea_length_scale, "trachea_length_scale"},
    {TargetKind::trachea_radius_scale, "trachea_radius_scale"},
}};

double& control_slot(syrinx::SyrinxControls& c, TargetKind kind) {
  switch (kind) {
    case TargetKind::p_lung: return c.p_lung;
    case TargetKind::tension_left: return c.tension_left;
    case TargetKind::tension_right: return c.tension_right;
    case TargetKind::trachea_length_scale: return c.trachea_length_scale;
    case TargetKind::trachea_radius_scale: return c.trachea_radius_scale;
    case TargetKind::midi_cc: break;
  }
  throw std::logic_error("midi target has no syrinx slot");
}

}  // namespace

std::string_view to_string(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[i] == name) return kAllFeatures[i];
  throw ConfigError("unknown mouth feature '" + std::string(name) + "'");
}

double feature_value(const vision::MouthFeatures& f, Feature which) {
  switch (which) {
    case Feature::area: return f.area;
    case Feature::height: return f.height;
    case Feature::width: return f.width;
    case Feature::aspect: return f.aspect;
    case Feature::cx: return f.c_n.x;
    case Feature::cy: return f.c_n.y;
  }
  return 0.0;
}

std::string to_string(const Target& t) {
  if (t.kind == TargetKind::midi_cc) return "cc:" + std::to_string(t.cc);
  for (const auto& s : kSyrinxTargets)
    if (s.kind == t.kind) return std::string(s.name);
  return "?";
}

Target parse_target(std::string_view name) {
  for (const auto& s : kSyrinxTargets)
    if (s.name == name) return {s.kind, 0};
  if (name.starts_with("cc:")) {
    const std::string_view digits = name.substr(3);
    int cc = -1;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cc);
    if (ec != std::errc{} || end != digits.data() + digits.size()) {
      throw ConfigError("malformed MIDI target '" + std::string(name) + "'");
    }
    return {TargetKind::midi_cc, cc};
  }
  throw ConfigError("unknown route target '" + std::string(name) + "'");
}

std::string_view to_string(Curve c) { return c == Curve::linear ? "linear" : "exponential"; }

Curve parse_curve(std::string_view name) {
  if (name == "linear") return Curve::linear;
  if (name == "exponential") return Curve::exponential;
  throw ConfigError("unknown curve '" + std::string(name) + "'");
}

void MapRoute::validate() const {
  const std::string label = std::string(to_string(source)) + " -> " + to_string(target);
  if (!std::isfinite(out_min) || !std::isfinite(out_max) || !(out_min < out_max)) {
    throw ConfigError("route " + label + ": out_min must be below out_max");
  }
  if (target.kind == TargetKind::midi_cc && (target.cc < 0 || target.cc > 127)) {
    throw ConfigError("route " + label + ": MIDI controller number must be in [0, 127]");
  }
  if (curve == Curve::exponential && out_min <= 0.0) {
    throw ConfigError("route " + label + ": exponential curve needs out_min > 0");
  }
  if (!std::isfinite(smoothing_ms) || smoothing_ms < 0.0) {
    throw ConfigError("route " + label + ": smoothing_ms must be non-negative");
  }
}

void validate_routes(std::span<const MapRoute> routes) {
  for (std::size_t i = 0; i < routes.size(); ++i) {
    routes[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (routes[j].target == routes[i].target) {
        throw ConfigError("more than one route drives " + to_string(routes[i].target));
      }
    }
  }
}

std::array<FeatureRange, kFeatureCount> Calibration::default_ranges() {
  // Pixel units of the mouth window at typical webcam scale.
  return {{{0.0, 2000.0}, {0.0, 12.0}, {0.0, 20.0}, {0.0, 1.5}, {0.0, 640.0}, {0.0, 480.0}}};
}

void Calibration::validate() const {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto& r = ranges[i];
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.min < r.max)) {
      throw ConfigError("calibration for " + std::string(kFeatureNames[i]) + ": min must be below max");
    }
  }
}

Normalized normalize(const vision::MouthFeatures& features, const Calibration& cal) {
  Normalized n{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto& r = cal.ranges[i];
    const double v = feature_value(features, kAllFeatures[i]);
    n[i] = std::clamp((v - r.min) / (r.max - r.min), 0.0, 1.0);
  }
  return n;
}

double route_output(const MapRoute& route, double n) {
  n = std::clamp(n, 0.0, 1.0);
  if (route.invert) n = 1.0 - n;
  if (n == 0.0) return route.out_min;
  if (n == 1.0) return route.out_max;
  if (route.curve == Curve::linear) return route.out_min + n * (route.out_max - route.out_min);
  return route.out_min * std::pow(route.out_max / route.out_min, n);
}

int midi_value(double n) {
  return static_cast<int>(std::floor(std::clamp(n, 0.0, 1.0) * 127.0 + 0.5));
}

namespace {

void route_into(ControlFrame& out, const MapRoute& route, double n) {
  if (route.target.kind == TargetKind::midi_cc) {
    const double m = route.invert ? 1.0 - std::clamp(n, 0.0, 1.0) : n;
    out.midi.emplace_back(route.target.cc, midi_value(m));
  } else {
    control_slot(out.syrinx, route.target.kind) = route_output(route, n);
  }
}

}  // namespace

ControlFrame apply_routes(const Normalized& n, std::span<const MapRoute> routes,
                          const syrinx::SyrinxControls& defaults) {
  ControlFrame out;
  out.syrinx = defaults;
  for (const auto& route : routes) route_into(out, route, n[static_cast<std::size_t>(route.source)]);
  return out;
}

Calibration calibrate_capture(std::span<const TimedFeatures> stream, double duration_s) {
  if (stream.empty()) throw EmptyCapture("calibration capture received no features");
  const double end = stream.front().time_s + duration_s;

  std::array<double, kFeatureCount> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& item : stream) {
    if (item.time_s > end) break;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const double v = feature_value(item.features, kAllFeatures[i]);
      lo[i] = std::min(lo[i], v);
      hi[i] = std::max(hi[i], v);
    }
  }

  Calibration cal;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double spread = hi[i] - lo[i];
    if (!(spread >= kMinCalibrationSpread)) continue;
    cal.ranges[i] = {lo[i] - kCalibrationMargin * spread, hi[i] + kCalibrationMargin * spread};
  }
  return cal;
}

Mapper::Mapper(std::vector<MapRoute> routes, Calibration cal, syrinx::SyrinxControls defaults)
    : routes_(std::move(routes)), cal_(cal), defaults_(defaults), smoothed_(routes_.size()) {
  validate_routes(routes_);
  cal_.validate();
  defaults_.validate();
}

void Mapper::set_route(const MapRoute& route) {
  route.validate();
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    if (routes_[i].target == route.target) {
      routes_[i] = route;
      smoothed_[i].reset();
      return;
    }
  }
  routes_.push_back(route);
  smoothed_.emplace_back();
}

void Mapper::set_calibration(const Calibration& cal) {
  cal.validate();
  cal_ = cal;
}

ControlFrame Mapper::map(const vision::MouthFeatures& features, std::uint64_t seq, double time_s) {
  const Normalized n = normalize(features, cal_);
  const double dt = last_time_ ? std::max(0.0, time_s - *last_time_) : 0.0;
  last_time_ = time_s;

  ControlFrame out;
  out.seq = seq;
  out.time_s = time_s;
  out.syrinx = defaults_;
  for (std::size_t i = 0; i < routes_.size(); ++i) {
    const MapRoute& route = routes_[i];
    double v = n[static_cast<std::size_t>(route.source)];
    auto& state = smoothed_[i];
    if (state && route.smoothing_ms > 0.0) {
      const double k = 1.0 - std::exp(-dt / (route.smoothing_ms * 1e-3));
      v = *state + k * (v - *state);
    }
    state = v;
    route_into(out, route, v);
  }
  return out;
}

}  // namespace mouthsyrinx::mapping
