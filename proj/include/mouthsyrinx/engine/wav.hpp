#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mouthsyrinx/errors.hpp"

namespace mouthsyrinx::engine {

// round(s * 32767) after clamping s to [-1, 1].
std::int16_t to_pcm16(double s);

// RIFF/WAVE, PCM, mono, 16-bit little-endian, 44-byte header.
std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate);
void write_wav(std::span<const double> samples, std::uint32_t sample_rate,
               const std::filesystem::path& path);

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<std::int16_t> samples;
};

// Reads the mono 16-bit PCM files written above; throws IoError otherwise.
WavData decode_wav(std::span<const std::uint8_t> bytes);

}  // namespace mouthsyrinx::engine
