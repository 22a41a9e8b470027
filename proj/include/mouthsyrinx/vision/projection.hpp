#pragma once

#include <cstddef>
#include <vector>

#include "mouthsyrinx/vision/image.hpp"

namespace mouthsyrinx::vision {

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

enum class Axis {
  horizontal,  // one value per column
  vertical,    // one value per row
};

using Projection = std::vector<double>;

// Centered moving average with replicated edges. window must be odd.
Projection smooth(const Projection& p, std::size_t window);

// Mean intensity per column (horizontal) or per row (vertical), then smoothed.
Projection project_and_smooth(const GrayImage& sub, Axis axis, std::size_t window);

// Vertical projection restricted to columns [x_begin, x_end).
Projection project_columns(const GrayImage& sub, std::size_t x_begin, std::size_t x_end,
                           std::size_t window);

struct LocalMinimum {
  double position = 0.0;  // subpixel index
  double value = 0.0;
  double depth = 0.0;       // below the higher flanking maximum
  double prominence = 0.0;  // below the lower flanking maximum
};

// Interior local minima whose depth reaches min_depth, in index order.
std::vector<LocalMinimum> local_minima(const Projection& p, double min_depth);

}  // namespace mouthsyrinx::vision
