#include "mouthsyrinx/vision/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mouthsyrinx::vision {

void TrackerParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("vision: ") + what);
  };
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
  require(beta_d > 0.0 && beta_d <= 1.0, "beta_d must be in (0, 1]");
  require(beta_a > 0.0 && beta_a <= 1.0, "beta_a must be in (0, 1]");
  require(search.smoothing_window % 2 == 1, "smoothing window must be odd");
  require(search.prominence >= 0.0, "prominence must be non-negative");
  require(search_half_width > 0.0 && search_half_height > 0.0, "search window sizes must be positive");
  require(init_x0 >= 0.0 && init_x0 < init_x1 && init_x1 <= 1.0, "init window x range invalid");
  require(init_y0 >= 0.0 && init_y0 < init_y1 && init_y1 <= 1.0, "init window y range invalid");
  require(min_d_n > 0.0, "min_d_n must be positive");
  require(lock_band_low > 0.0 && lock_band_low < 1.0 && lock_band_high > 1.0, "lock band invalid");
}

RotatedRegion init_window(std::size_t width, std::size_t height, const TrackerParams& params,
                          std::optional<Point2> click) {
  const auto w = static_cast<double>(width), h = static_cast<double>(height);
  const auto x0 = static_cast<long>(std::lround(params.init_x0 * w));
  const auto x1 = static_cast<long>(std::lround(params.init_x1 * w));
  const auto y0 = static_cast<long>(std::lround(params.init_y0 * h));
  const auto y1 = static_cast<long>(std::lround(params.init_y1 * h));
  const long cols = std::max(1L, x1 - x0), rows = std::max(1L, y1 - y0);
  long left = x0, top = y0;
  if (click) {
    left = std::lround(click->x - 0.5 * static_cast<double>(cols - 1));
    top = std::lround(click->y - 0.5 * static_cast<double>(rows - 1));
    left = std::clamp(left, 0L, static_cast<long>(width) - cols);
    top = std::clamp(top, 0L, static_cast<long>(height) - rows);
  }
  return pixel_rectangle(static_cast<std::size_t>(left), static_cast<std::size_t>(top),
                         static_cast<std::size_t>(cols), static_cast<std::size_t>(rows));
}

namespace {

NostrilPair detect_in(const Frame& frame, const RotatedRegion& region, const NostrilSearchParams& search) {
  const GrayImage window = extract_gray(frame.image, region);
  const NostrilPair local = find_nostril_minima(window, search);
  return NostrilPair(region.sample_to_image(local.n1()), region.sample_to_image(local.n2()));
}

}  // namespace

TrackState initialize(const Frame& frame, const TrackerParams& params, std::optional<Point2> click) {
  frame.validate_for_tracking();
  const RotatedRegion region = init_window(frame.width(), frame.height(), params, click);
  const NostrilPair pair = detect_in(frame, region, params.search);
  const NostrilGeometry g = nostril_geometry(pair);
  if (g.d_n < params.min_d_n) {
    throw NostrilsNotFound("nostril distance " + std::to_string(g.d_n) + " px is below the minimum");
  }
  return TrackState{g, pair, g.c_n, params.alpha, params.beta_d, params.beta_a, g.d_n, 0};
}

RotatedRegion nostril_search_region(const TrackState& state, const TrackerParams& params) {
  RotatedRegion r;
  r.center = predict_center(state.geometry.c_n, state.c_prev, state.alpha);
  r.half_width = params.search_half_width * state.geometry.d_n;
  r.half_height = params.search_half_height * state.geometry.d_n;
  r.angle = state.geometry.a_n;
  return r;
}

TrackState track_step(const Frame& frame, const TrackState& state, const TrackerParams& params) {
  frame.validate_for_tracking();
  const RotatedRegion region = nostril_search_region(state, params);
  if (!region.inside(frame.width(), frame.height())) {
    throw TrackingLost("nostril search window left the image");
  }

  std::optional<NostrilPair> pair;
  try {
    pair = detect_in(frame, region, params.search);
  } catch (const NostrilsNotFound& e) {
    throw TrackingLost(std::string("nostrils not found: ") + e.what());
  } catch (const DegeneratePair& e) {
    throw TrackingLost(std::string("degenerate nostril pair: ") + e.what());
  }

  const NostrilGeometry raw = nostril_geometry(*pair);
  if (raw.d_n < params.lock_band_low * state.d_init || raw.d_n > params.lock_band_high * state.d_init) {
    throw TrackingLost("nostril distance " + std::to_string(raw.d_n) + " px left the lock band");
  }

  const NostrilGeometry& old = state.geometry;
  NostrilGeometry g;
  g.d_n = state.beta_d * raw.d_n + (1.0 - state.beta_d) * old.d_n;
  g.a_n = state.beta_a * raw.a_n + (1.0 - state.beta_a) * old.a_n;
  g.c_n = raw.c_n;
  if (g.d_n < params.min_d_n) throw TrackingLost("face too small to track");

  TrackState next = state;
  next.geometry = g;
  next.pair = *pair;
  next.c_prev = old.c_n;
  ++next.frames_since_lock;
  return next;
}

}  // namespace mouthsyrinx::vision
