#include "mouthsyrinx/vision/region.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mouthsyrinx::vision {

Point2 RotatedRegion::to_image(Point2 local) const {
  const double c = std::cos(angle), s = std::sin(angle);
  return {center.x + c * local.x - s * local.y, center.y + s * local.x + c * local.y};
}

Point2 RotatedRegion::to_local(Point2 image) const {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dx = image.x - center.x, dy = image.y - center.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

std::array<Point2, 4> RotatedRegion::corners() const {
  return {to_image({-half_width, -half_height}), to_image({half_width, -half_height}),
          to_image({half_width, half_height}), to_image({-half_width, half_height})};
}

bool RotatedRegion::inside(std::size_t width, std::size_t height) const {
  const double max_x = static_cast<double>(width) - 1.0;
  const double max_y = static_cast<double>(height) - 1.0;
  return std::ranges::all_of(corners(), [&](Point2 p) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= max_x && p.y <= max_y;
  });
}

std::size_t RotatedRegion::columns() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(2.0 * half_width)));
}

std::size_t RotatedRegion::rows() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(2.0 * half_height)));
}

Point2 RotatedRegion::sample_to_image(Point2 sample) const {
  const double u = sample.x - 0.5 * static_cast<double>(columns() - 1);
  const double v = sample.y - 0.5 * static_cast<double>(rows() - 1);
  return to_image({u, v});
}

RotatedRegion pixel_rectangle(std::size_t x0, std::size_t y0, std::size_t cols, std::size_t rows) {
  RotatedRegion r;
  r.half_width = 0.5 * static_cast<double>(cols);
  r.half_height = 0.5 * static_cast<double>(rows);
  r.center = {static_cast<double>(x0) + 0.5 * static_cast<double>(cols - 1),
              static_cast<double>(y0) + 0.5 * static_cast<double>(rows - 1)};
  r.angle = 0.0;
  return r;
}

namespace {

// Calls sink(i, j, x0, y0, fx, fy) for every sample of the region's grid.
template <typename Sink>
void for_each_sample(const RotatedRegion& region, Sink&& sink) {
  const std::size_t cols = region.columns(), rows = region.rows();
  const double c = std::cos(region.angle), s = std::sin(region.angle);
  const double u0 = -0.5 * static_cast<double>(cols - 1);
  const double v0 = -0.5 * static_cast<double>(rows - 1);
  for (std::size_t j = 0; j < rows; ++j) {
    const double v = v0 + static_cast<double>(j);
    for (std::size_t i = 0; i < cols; ++i) {
      const double u = u0 + static_cast<double>(i);
      const double x = region.center.x + c * u - s * v;
      const double y = region.center.y + s * u + c * v;
      const double xf = std::floor(x), yf = std::floor(y);
      sink(i, j, static_cast<long>(xf), static_cast<long>(yf), x - xf, y - yf);
    }
  }
}

}  // namespace

GrayImage extract_gray(const RgbImage& image, const RotatedRegion& region) {
  GrayImage out(region.columns(), region.rows());
  const long w = static_cast<long>(image.width), h = static_cast<long>(image.height);
  auto value = [&](long x, long y) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    const std::size_t i = (static_cast<std::size_t>(y) * image.width + static_cast<std::size_t>(x)) * 3;
    return (static_cast<double>(image.pixels[i]) + image.pixels[i + 1] + image.pixels[i + 2]) / 3.0;
  };
  for_each_sample(region, [&](std::size_t i, std::size_t j, long x0, long y0, double fx, double fy) {
    const double top = (1.0 - fx) * value(x0, y0) + fx * value(x0 + 1, y0);
    const double bottom = (1.0 - fx) * value(x0, y0 + 1) + fx * value(x0 + 1, y0 + 1);
    out.at(i, j) = (1.0 - fy) * top + fy * bottom;
  });
  return out;
}

RgbImage extract_rgb(const RgbImage& image, const RotatedRegion& region) {
  RgbImage out(region.columns(), region.rows());
  const long w = static_cast<long>(image.width), h = static_cast<long>(image.height);
  auto channel = [&](long x, long y, int ch) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return image.pixels[(static_cast<std::size_t>(y) * image.width + static_cast<std::size_t>(x)) * 3 +
                        static_cast<std::size_t>(ch)];
  };
  for_each_sample(region, [&](std::size_t i, std::size_t j, long x0, long y0, double fx, double fy) {
    std::uint8_t rgb[3];
    for (int ch = 0; ch < 3; ++ch) {
      const double top = (1.0 - fx) * channel(x0, y0, ch) + fx * channel(x0 + 1, y0, ch);
      const double bottom = (1.0 - fx) * channel(x0, y0 + 1, ch) + fx * channel(x0 + 1, y0 + 1, ch);
      const double v = (1.0 - fy) * top + fy * bottom;
      rgb[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    out.set(i, j, {rgb[0], rgb[1], rgb[2]});
  });
  return out;
}

}  // namespace mouthsyrinx::vision
