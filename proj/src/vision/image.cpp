#include "mouthsyrinx/vision/image.hpp"

#include <string>

namespace mouthsyrinx::vision {

void Frame::validate() const {
  if (image.pixels.size() != image.width * image.height * 3) {
    throw Error("frame " + std::to_string(seq) + ": pixel buffer holds " +
                std::to_string(image.pixels.size()) + " bytes, expected " +
                std::to_string(image.width * image.height * 3));
  }
}

void Frame::validate_for_tracking() const {
  validate();
  if (image.width < kMinWidth || image.height < kMinHeight) {
    throw Error("frame " + std::to_string(seq) + " is " + std::to_string(image.width) + "x" +
                std::to_string(image.height) + ", tracking needs at least 64x48");
  }
}

}  // namespace mouthsyrinx::vision
