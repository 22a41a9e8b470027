#include "mouthsyrinx/vision/nostrils.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mouthsyrinx/vision/projection.hpp"

namespace mouthsyrinx::vision {

NostrilPair::NostrilPair(Point2 a, Point2 b) {
  if (a == b) throw DegeneratePair("nostril centers coincide");
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  n1_ = a;
  n2_ = b;
}

NostrilGeometry nostril_geometry(const NostrilPair& pair) {
  const Point2 a = pair.n1(), b = pair.n2();
  NostrilGeometry g;
  g.d_n = distance(a, b);
  g.c_n = 0.5 * (a + b);
  double angle = std::atan2(b.y - a.y, b.x - a.x);
  // n1.x <= n2.x keeps the angle in [-pi/2, pi/2]; fold the lower endpoint.
  if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;
  g.a_n = angle;
  return g;
}

Point2 predict_center(Point2 c_t, Point2 c_tm1, double alpha) {
  return {c_t.x + alpha * (c_t.x - c_tm1.x), c_t.y + alpha * (c_t.y - c_tm1.y)};
}

namespace {

double row_minimum(const Projection& p) {
  const auto it = std::min_element(p.begin(), p.end());
  const std::size_t i = static_cast<std::size_t>(it - p.begin());
  if (i == 0 || i + 1 >= p.size()) return static_cast<double>(i);
  const double l = p[i - 1], c = p[i], r = p[i + 1];
  const double curvature = l - 2.0 * c + r;
  const double offset = curvature > 0.0 ? 0.5 * (l - r) / curvature : 0.0;
  return static_cast<double>(i) + std::clamp(offset, -0.5, 0.5);
}

}  // namespace

NostrilPair find_nostril_minima(const GrayImage& window, const NostrilSearchParams& params) {
  const std::size_t smoothing = std::min<std::size_t>(
      params.smoothing_window, window.width % 2 == 1 ? window.width : window.width - 1);
  const Projection columns = project_and_smooth(window, Axis::horizontal, std::max<std::size_t>(smoothing, 1));
  auto minima = local_minima(columns, params.prominence);
  if (minima.size() < 2) {
    throw NostrilsNotFound("found " + std::to_string(minima.size()) +
                           " qualifying projection minima, need two");
  }
  std::partial_sort(minima.begin(), minima.begin() + 2, minima.end(),
                    [](const LocalMinimum& a, const LocalMinimum& b) { return a.prominence > b.prominence; });
  double x1 = minima[0].position, x2 = minima[1].position;
  if (x2 < x1) std::swap(x1, x2);

  // Each nostril's y comes from a row projection over a slice around its x.
  const double half_slice = std::max(1.0, 0.25 * (x2 - x1));
  auto nostril_y = [&](double x) {
    const double lo = std::max(0.0, std::round(x - half_slice));
    const double hi = std::min(static_cast<double>(window.width), std::round(x + half_slice) + 1.0);
    const Projection rows =
        project_columns(window, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi), params.smoothing_window);
    return row_minimum(rows);
  };
  return NostrilPair({x1, nostril_y(x1)}, {x2, nostril_y(x2)});
}

}  // namespace mouthsyrinx::vision
