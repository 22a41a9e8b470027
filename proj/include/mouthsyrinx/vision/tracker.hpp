#pragma once

#include <cstdint>
#include <optional>

#include "mouthsyrinx/vision/nostrils.hpp"

namespace mouthsyrinx::vision {

struct TrackerParams {
  NostrilSearchParams search;
  double alpha = 1.0;    // prediction gain
  double beta_d = 0.5;   // smoothing weight of the new D_N
  double beta_a = 0.5;   // smoothing weight of the new A_N
  // Search region half sizes as multiples of the smoothed D_N.
  double search_half_width = 0.9;
  double search_half_height = 0.5;
  // Init window as fractions of the frame: top-central rectangle.
  double init_x0 = 0.25;
  double init_x1 = 0.75;
  double init_y0 = 0.05;
  double init_y1 = 0.35;
  double min_d_n = 8.0;         // below this the face is too small to track
  double lock_band_low = 0.5;   // D_N relative to its value at initialization
  double lock_band_high = 2.0;

  void validate() const;
  friend bool operator==(const TrackerParams&, const TrackerParams&) = default;
};

struct TrackState {
  NostrilGeometry geometry;  // D_N and A_N smoothed, C_N raw
  NostrilPair pair;          // last raw detection
  Point2 c_prev;             // C_N one frame earlier
  double alpha = 1.0;
  double beta_d = 0.5;
  double beta_a = 0.5;
  double d_init = 0.0;       // D_N at initialization
  std::uint64_t frames_since_lock = 0;
};

// Axis-aligned init window; centered on `click` when given, otherwise the
// fixed top-central rectangle. Clamped to the frame.
RotatedRegion init_window(std::size_t width, std::size_t height, const TrackerParams& params,
                          std::optional<Point2> click = std::nullopt);

// Throws NostrilsNotFound when the window does not show two nostrils.
TrackState initialize(const Frame& frame, const TrackerParams& params,
                      std::optional<Point2> click = std::nullopt);

// Region the next track_step will search.
RotatedRegion nostril_search_region(const TrackState& state, const TrackerParams& params);

// Throws TrackingLost; the caller must re-initialize.
TrackState track_step(const Frame& frame, const TrackState& state, const TrackerParams& params);

}  // namespace mouthsyrinx::vision
