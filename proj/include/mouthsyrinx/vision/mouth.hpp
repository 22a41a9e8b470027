#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mouthsyrinx/vision/image.hpp"
#include "mouthsyrinx/vision/nostrils.hpp"
#include "mouthsyrinx/vision/region.hpp"

namespace mouthsyrinx::vision {

struct SegmentationThresholds {
  int red_min = 90;
  int intensity_max = 100;

  void validate() const;
  friend bool operator==(const SegmentationThresholds&, const SegmentationThresholds&) = default;
};

struct BinaryMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  BinaryMask() = default;
  BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

  bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v) { bits[y * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(PixelCoord, PixelCoord) = default;
};

struct Blob {
  std::vector<PixelCoord> pixels;
  std::size_t count() const { return pixels.size(); }
};

struct MouthFeatures {
  double area = 0.0;
  double height = 0.0;
  double width = 0.0;
  double aspect = 0.0;
  Point2 c_n;
  double a_n = 0.0;
};

inline constexpr double kMinAspectWidth = 0.25;
inline constexpr double kMaxAspect = 4.0;

struct MouthWindowParams {
  double k_down = 1.5;
  double k_w = 1.0;
  double k_h = 0.75;
  friend bool operator==(const MouthWindowParams&, const MouthWindowParams&) = default;
};

RotatedRegion mouth_window(const NostrilGeometry& geometry, const MouthWindowParams& params = {});

BinaryMask segment_mouth(const RgbImage& sub, const SegmentationThresholds& thr);

// Count of set pixels in the 5-wide, 3-tall neighborhood of (x, y), center
// included, out-of-bounds cells clear.
int neighborhood_count(const BinaryMask& mask, std::size_t x, std::size_t y);

// One simultaneous voting pass: set pixels with fewer than 4 set neighbors
// are cleared, clear pixels with more than 4 are set.
BinaryMask vote_filter(const BinaryMask& mask);

// Largest 8-connected component; ties go to the component whose first pixel
// comes first in row-major order. nullopt when the mask is empty (mouth closed).
std::optional<Blob> largest_component(const BinaryMask& mask);

// Area, population standard deviations of y and x, and their clamped ratio.
MouthFeatures shape_features(const std::optional<Blob>& blob, const NostrilGeometry& geometry);

}  // namespace mouthsyrinx::vision
