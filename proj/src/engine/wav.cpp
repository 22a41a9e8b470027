#include "mouthsyrinx/engine/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mouthsyrinx::engine {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::equal(tag, tag + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
}

}  // namespace

std::int16_t to_pcm16(double s) {
  if (std::isnan(s)) s = 0.0;
  return static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * 32767.0));
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : samples) put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  return out;
}

void write_wav(std::span<const double> samples, std::uint32_t sample_rate, const std::filesystem::path& path) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

WavData decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 44 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE") || !tag_is(b, 12, "fmt ") ||
      !tag_is(b, 36, "data")) {
    throw IoError("not a canonical 44-byte-header WAV file");
  }
  if (get_u16(b, 20) != 1 || get_u16(b, 22) != 1 || get_u16(b, 34) != 16) {
    throw IoError("only mono 16-bit PCM WAV is supported");
  }
  const std::uint32_t n = get_u32(b, 40);
  if (b.size() - 44 < n || n % 2 != 0) throw IoError("WAV data chunk is truncated");
  WavData w;
  w.sample_rate = get_u32(b, 24);
  w.samples.resize(n / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = static_cast<std::int16_t>(get_u16(b, 44 + 2 * i));
  }
  return w;
}

}  // namespace mouthsyrinx::engine
