#pragma once

#include <array>
#include <cstddef>

#include "mouthsyrinx/point.hpp"
#include "mouthsyrinx/vision/image.hpp"

namespace mouthsyrinx::vision {

// Oriented rectangle in image coordinates. The local u axis points along
// `angle` (measured with atan2 in image coordinates), v is perpendicular.
struct RotatedRegion {
  Point2 center;
  double half_width = 1.0;
  double half_height = 1.0;
  double angle = 0.0;

  Point2 to_image(Point2 local) const;
  Point2 to_local(Point2 image) const;
  // Corners in order (-u,-v), (+u,-v), (+u,+v), (-u,+v).
  std::array<Point2, 4> corners() const;
  bool inside(std::size_t width, std::size_t height) const;

  // Sampling grid used for extraction.
  std::size_t columns() const;
  std::size_t rows() const;
  // Maps a (possibly subpixel) extracted-subimage coordinate to the image.
  Point2 sample_to_image(Point2 sample) const;
};

// De-rotated bilinear extraction; samples outside the frame read as black.
GrayImage extract_gray(const RgbImage& image, const RotatedRegion& region);
RgbImage extract_rgb(const RgbImage& image, const RotatedRegion& region);

// Axis-aligned, pixel-exact region covering [x0, x0 + cols) x [y0, y0 + rows).
RotatedRegion pixel_rectangle(std::size_t x0, std::size_t y0, std::size_t cols, std::size_t rows);

}  // namespace mouthsyrinx::vision
