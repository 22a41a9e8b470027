#include "mouthsyrinx/vision/mouth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mouthsyrinx::vision {

void SegmentationThresholds::validate() const {
  if (red_min < 0 || red_min > 255 || intensity_max < 0 || intensity_max > 255) {
    throw ConfigError("segmentation thresholds must be in [0, 255]");
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

RotatedRegion mouth_window(const NostrilGeometry& g, const MouthWindowParams& params) {
  RotatedRegion r;
  const double down = params.k_down * g.d_n;
  // Face-down direction is the local +v axis: perpendicular to the nostril line.
  r.center = {g.c_n.x - down * std::sin(g.a_n), g.c_n.y + down * std::cos(g.a_n)};
  r.half_width = params.k_w * g.d_n;
  r.half_height = params.k_h * g.d_n;
  r.angle = g.a_n;
  return r;
}

BinaryMask segment_mouth(const RgbImage& sub, const SegmentationThresholds& thr) {
  BinaryMask mask(sub.width, sub.height);
  for (std::size_t i = 0, n = sub.width * sub.height; i < n; ++i) {
    const Rgb p{sub.pixels[3 * i], sub.pixels[3 * i + 1], sub.pixels[3 * i + 2]};
    mask.bits[i] = (p.r > thr.red_min && intensity(p) < thr.intensity_max) ? 1 : 0;
  }
  return mask;
}

int neighborhood_count(const BinaryMask& mask, std::size_t x, std::size_t y) {
  const long w = static_cast<long>(mask.width), h = static_cast<long>(mask.height);
  const long cx = static_cast<long>(x), cy = static_cast<long>(y);
  int count = 0;
  for (long yy = std::max(0L, cy - 1); yy <= std::min(h - 1, cy + 1); ++yy)
    for (long xx = std::max(0L, cx - 2); xx <= std::min(w - 1, cx + 2); ++xx)
      count += mask.bits[static_cast<std::size_t>(yy * w + xx)];
  return count;
}

BinaryMask vote_filter(const BinaryMask& mask) {
  const std::size_t w = mask.width, h = mask.height;
  BinaryMask out(w, h);
  if (w == 0 || h == 0) return out;

  // Summed-area table with a zero border: sat[(y+1)(w+1) + x+1] = sum over [0,x]x[0,y].
  std::vector<int> sat((w + 1) * (h + 1), 0);
  for (std::size_t y = 0; y < h; ++y) {
    int row = 0;
    for (std::size_t x = 0; x < w; ++x) {
      row += mask.bits[y * w + x];
      sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
    }
  }
  auto box = [&](std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    return sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
  };

  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y >= 1 ? y - 1 : 0, y1 = std::min(h, y + 2);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x >= 2 ? x - 2 : 0, x1 = std::min(w, x + 3);
      const int count = box(x0, y0, x1, y1);
      const bool set = mask.bits[y * w + x] != 0;
      out.bits[y * w + x] = set ? (count >= 4 ? 1 : 0) : (count > 4 ? 1 : 0);
    }
  }
  return out;
}

std::optional<Blob> largest_component(const BinaryMask& mask) {
  const long w = static_cast<long>(mask.width), h = static_cast<long>(mask.height);
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::optional<Blob> best;
  std::vector<PixelCoord> stack;

  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const auto start = static_cast<std::size_t>(y * w + x);
      if (!mask.bits[start] || seen[start]) continue;
      Blob blob;
      seen[start] = 1;
      stack.push_back({static_cast<int>(x), static_cast<int>(y)});
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        blob.pixels.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const long nx = p.x + dx, ny = p.y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto k = static_cast<std::size_t>(ny * w + nx);
            if (mask.bits[k] && !seen[k]) {
              seen[k] = 1;
              stack.push_back({static_cast<int>(nx), static_cast<int>(ny)});
            }
          }
        }
      }
      if (!best || blob.count() > best->count()) best = std::move(blob);
    }
  }
  return best;
}

MouthFeatures shape_features(const std::optional<Blob>& blob, const NostrilGeometry& geometry) {
  MouthFeatures f;
  f.c_n = geometry.c_n;
  f.a_n = geometry.a_n;
  if (!blob || blob->pixels.empty()) return f;

  // Integer moments about the first pixel keep translation and scaling exact.
  const PixelCoord origin = blob->pixels.front();
  std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0;
  for (const auto& p : blob->pixels) {
    const std::int64_t dx = p.x - origin.x, dy = p.y - origin.y;
    sx += dx;
    sy += dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const auto n = static_cast<std::int64_t>(blob->count());
  const auto n2 = static_cast<double>(n) * static_cast<double>(n);
  f.area = static_cast<double>(n);
  f.width = std::sqrt(static_cast<double>(n * sxx - sx * sx) / n2);
  f.height = std::sqrt(static_cast<double>(n * syy - sy * sy) / n2);
  f.aspect = std::clamp(f.height / std::max(f.width, kMinAspectWidth), 0.0, kMaxAspect);
  return f;
}

}  // namespace mouthsyrinx::vision
