#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mouthsyrinx/errors.hpp"

namespace mouthsyrinx::vision {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

// Integer mean of the three channels, the intensity used for segmentation.
constexpr int intensity(Rgb p) { return (int{p.r} + int{p.g} + int{p.b}) / 3; }

// Row-major interleaved RGB raster.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  Rgb at(std::size_t x, std::size_t y) const {
    const std::size_t i = (y * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb p) {
    const std::size_t i = (y * width + x) * 3;
    pixels[i] = p.r;
    pixels[i + 1] = p.g;
    pixels[i + 2] = p.b;
  }
  bool empty() const { return width == 0 || height == 0; }
};

// One video frame. The tracker needs at least kMinWidth x kMinHeight pixels.
struct Frame {
  static constexpr std::size_t kMinWidth = 64;
  static constexpr std::size_t kMinHeight = 48;

  RgbImage image;
  std::uint64_t seq = 0;
  double timestamp = 0.0;

  std::size_t width() const { return image.width; }
  std::size_t height() const { return image.height; }

  // Throws Error if the pixel buffer does not match the dimensions.
  void validate() const;
  // validate() plus the tracker's minimum size.
  void validate_for_tracking() const;
};

// Single-channel real-valued raster, used for projection analysis.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  bool empty() const { return values.empty(); }
};

}  // namespace mouthsyrinx::vision
