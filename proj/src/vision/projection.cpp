#include "mouthsyrinx/vision/projection.hpp"

#include <algorithm>
#include <stdexcept>

namespace mouthsyrinx::vision {

Projection smooth(const Projection& p, std::size_t window) {
  if (window % 2 == 0) throw std::invalid_argument("smoothing window must be odd");
  if (window <= 1 || p.empty()) return p;
  const long n = static_cast<long>(p.size());
  const long half = static_cast<long>(window / 2);
  Projection out(p.size());
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = i - half; k <= i + half; ++k) acc += p[static_cast<std::size_t>(std::clamp(k, 0L, n - 1))];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(window);
  }
  return out;
}

Projection project_and_smooth(const GrayImage& sub, Axis axis, std::size_t window) {
  if (sub.empty()) throw EmptyRegion("projection of an empty region");
  Projection p;
  if (axis == Axis::horizontal) {
    p.assign(sub.width, 0.0);
    for (std::size_t y = 0; y < sub.height; ++y)
      for (std::size_t x = 0; x < sub.width; ++x) p[x] += sub.at(x, y);
    for (double& v : p) v /= static_cast<double>(sub.height);
  } else {
    p.assign(sub.height, 0.0);
    for (std::size_t y = 0; y < sub.height; ++y) {
      for (std::size_t x = 0; x < sub.width; ++x) p[y] += sub.at(x, y);
      p[y] /= static_cast<double>(sub.width);
    }
  }
  if (window > p.size()) throw std::invalid_argument("smoothing window longer than the projection");
  return smooth(p, window);
}

Projection project_columns(const GrayImage& sub, std::size_t x_begin, std::size_t x_end,
                           std::size_t window) {
  x_end = std::min(x_end, sub.width);
  if (sub.empty() || x_begin >= x_end) throw EmptyRegion("column slice is empty");
  Projection p(sub.height, 0.0);
  for (std::size_t y = 0; y < sub.height; ++y) {
    for (std::size_t x = x_begin; x < x_end; ++x) p[y] += sub.at(x, y);
    p[y] /= static_cast<double>(x_end - x_begin);
  }
  return smooth(p, std::min(window, p.size() % 2 == 1 ? p.size() : p.size() - 1));
}

std::vector<LocalMinimum> local_minima(const Projection& p, double min_depth) {
  std::vector<LocalMinimum> out;
  const std::size_t n = p.size();
  if (n < 3) return out;

  // Climb from a run of equal values until the profile turns down again.
  auto climb_left = [&](std::size_t a) {
    std::size_t k = a;
    while (k > 0 && p[k - 1] >= p[k]) --k;
    return p[k];
  };
  auto climb_right = [&](std::size_t b) {
    std::size_t k = b;
    while (k + 1 < n && p[k + 1] >= p[k]) ++k;
    return p[k];
  };

  std::size_t a = 1;
  while (a + 1 < n) {
    std::size_t b = a;
    while (b + 1 < n && p[b + 1] == p[a]) ++b;
    const bool interior = b + 1 < n;
    if (interior && p[a - 1] > p[a] && p[b + 1] > p[b]) {
      LocalMinimum m;
      m.value = p[a];
      const double left = climb_left(a), right = climb_right(b);
      m.depth = std::max(left, right) - m.value;
      m.prominence = std::min(left, right) - m.value;
      if (a == b) {
        const double l = p[a - 1], c = p[a], r = p[a + 1];
        const double curvature = l - 2.0 * c + r;
        const double offset = curvature > 0.0 ? 0.5 * (l - r) / curvature : 0.0;
        m.position = static_cast<double>(a) + std::clamp(offset, -0.5, 0.5);
      } else {
        m.position = 0.5 * static_cast<double>(a + b);
      }
      if (m.depth >= min_depth) out.push_back(m);
    }
    a = b + 1;
  }
  return out;
}

}  // namespace mouthsyrinx::vision
