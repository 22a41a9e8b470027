#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mouthsyrinx/errors.hpp"
#include "mouthsyrinx/mapping/mapping.hpp"
#include "mouthsyrinx/vision/pipeline.hpp"

namespace mouthsyrinx::engine {

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Binary messages start with four ASCII bytes followed by little-endian fields.
inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'F', 'R', 'M', '0'};
inline constexpr std::array<std::uint8_t, 4> kMaskMagic{'M', 'S', 'K', '0'};
inline constexpr std::array<std::uint8_t, 4> kPcmMagic{'P', 'C', 'M', '0'};

// FRM0: u16 width, u16 height, u32 seq, width*height*3 RGB bytes.
std::vector<std::uint8_t> encode_frame(const vision::RgbImage& image, std::uint32_t seq);
vision::Frame decode_frame(std::span<const std::uint8_t> bytes);

// MSK0: u32 seq, u16 w, u16 h, then u16 run lengths alternating clear/set,
// starting with a clear run. Runs longer than 65535 are split with a
// zero-length run of the other value.
std::vector<std::uint8_t> encode_mask(const vision::BinaryMask& mask, std::uint32_t seq);
struct MaskMessage {
  std::uint32_t seq = 0;
  vision::BinaryMask mask;
};
MaskMessage decode_mask(std::span<const std::uint8_t> bytes);

// PCM0: u32 seq, u32 nsamples, i16 samples.
std::vector<std::uint8_t> encode_pcm(std::span<const std::int16_t> samples, std::uint32_t seq);
struct PcmMessage {
  std::uint32_t seq = 0;
  std::vector<std::int16_t> samples;
};
PcmMessage decode_pcm(std::span<const std::uint8_t> bytes);

struct InitRequest {
  int x = 0;
  int y = 0;
};
struct ThresholdsRequest {
  vision::SegmentationThresholds thresholds;
};
struct RouteRequest {
  mapping::MapRoute route;
};
struct CalibrateRequest {
  double seconds = 0.0;
};
using ClientRequest = std::variant<InitRequest, ThresholdsRequest, RouteRequest, CalibrateRequest>;

// Throws ProtocolError on malformed JSON, unknown types or invalid fields.
ClientRequest parse_request(std::string_view text);
std::string format_request(const ClientRequest& request);

std::string features_message(const vision::FrameAnalysis& analysis, std::uint32_t seq);
std::string ack_message(std::string_view msg);
std::string error_message(std::string_view msg);

}  // namespace mouthsyrinx::engine
