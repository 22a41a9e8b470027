#pragma once

#include <cstddef>
#include <cstdint>

#include "mouthsyrinx/point.hpp"
#include "mouthsyrinx/vision/image.hpp"
#include "mouthsyrinx/vision/region.hpp"

namespace mouthsyrinx::vision {

class NostrilsNotFound : public Error {
 public:
  using Error::Error;
};

class DegeneratePair : public Error {
 public:
  using Error::Error;
};

class TrackingLost : public Error {
 public:
  using Error::Error;
};

// Nostril centers, ordered left to right.
class NostrilPair {
 public:
  NostrilPair(Point2 a, Point2 b);  // throws DegeneratePair if a == b

  Point2 n1() const { return n1_; }
  Point2 n2() const { return n2_; }

 private:
  Point2 n1_;
  Point2 n2_;
};

struct NostrilGeometry {
  double d_n = 0.0;  // distance between centers
  Point2 c_n;        // midpoint
  double a_n = 0.0;  // line angle, (-pi/2, pi/2]
};

NostrilGeometry nostril_geometry(const NostrilPair& pair);

// Constant-velocity prediction: c_t + alpha * (c_t - c_tm1).
Point2 predict_center(Point2 c_t, Point2 c_tm1, double alpha);

struct NostrilSearchParams {
  std::size_t smoothing_window = 5;
  double prominence = 10.0;
  friend bool operator==(const NostrilSearchParams&, const NostrilSearchParams&) = default;
};

// Locates the two nostrils inside a search subimage: the two deepest minima
// of the column projection give x, and a row projection over a slice around
// each x gives that nostril's y. Coordinates are subimage pixels.
NostrilPair find_nostril_minima(const GrayImage& window, const NostrilSearchParams& params);

}  // namespace mouthsyrinx::vision
