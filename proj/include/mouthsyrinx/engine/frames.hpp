#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mouthsyrinx/errors.hpp"
#include "mouthsyrinx/vision/image.hpp"

namespace mouthsyrinx::engine {

class NotFound : public IoError {
 public:
  using IoError::IoError;
};

class MalformedImage : public IoError {
 public:
  using IoError::IoError;
};

class MixedDimensions : public IoError {
 public:
  using IoError::IoError;
};

// Binary PPM (P6). maxval up to 255; values are rescaled to 0..255.
vision::RgbImage decode_ppm(std::span<const std::uint8_t> bytes, const std::string& name);
std::vector<std::uint8_t> encode_ppm(const vision::RgbImage& image);
vision::RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const vision::RgbImage& image);

// 8-bit PNG of any color type; alpha is dropped, gray is expanded.
vision::RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const vision::RgbImage& image);

// Frames from a directory of .ppm / .png files (lexicographic by file name),
// or from a packed raw RGB file whose sidecar `<file>.dims` holds
// "<width> <height>". seq runs 0..n-1 and timestamps are seq / fps.
std::vector<vision::Frame> load_frames(const std::filesystem::path& path, double fps);

}  // namespace mouthsyrinx::engine
