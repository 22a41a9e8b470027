#include "mouthsyrinx/engine/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace mouthsyrinx::engine {

using nlohmann::json;

namespace {

class Writer {
 public:
  explicit Writer(const std::array<std::uint8_t, 4>& magic) : out_(magic.begin(), magic.end()) {}
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, const std::array<std::uint8_t, 4>& magic, const char* what)
      : b_(b), what_(what) {
    if (b_.size() < 4 || !std::equal(magic.begin(), magic.end(), b_.begin())) {
      throw ProtocolError(std::string(what) + ": bad magic");
    }
    pos_ = 4;
  }
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw ProtocolError(std::string(what_) + ": message truncated");
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(b_[pos_] | b_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::uint16_t checked_u16(std::size_t v, const char* what) {
  if (v > 0xFFFF) throw ProtocolError(std::string(what) + " does not fit in 16 bits");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const vision::RgbImage& image, std::uint32_t seq) {
  Writer w(kFrameMagic);
  w.u16(checked_u16(image.width, "frame width"));
  w.u16(checked_u16(image.height, "frame height"));
  w.u32(seq);
  w.bytes(image.pixels);
  return std::move(w.data());
}

vision::Frame decode_frame(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, kFrameMagic, "FRM0");
  const std::size_t width = r.u16();
  const std::size_t height = r.u16();
  const std::uint32_t seq = r.u32();
  if (width == 0 || height == 0) throw ProtocolError("FRM0: zero dimension");
  const std::size_t n = width * height * 3;
  if (r.remaining() != n) {
    throw ProtocolError("FRM0: expected " + std::to_string(n) + " pixel bytes, got " +
                        std::to_string(r.remaining()));
  }
  vision::Frame f;
  f.image = vision::RgbImage(width, height);
  const auto px = r.take(n);
  std::copy(px.begin(), px.end(), f.image.pixels.begin());
  f.seq = seq;
  return f;
}

std::vector<std::uint8_t> encode_mask(const vision::BinaryMask& mask, std::uint32_t seq) {
  Writer w(kMaskMagic);
  w.u32(seq);
  w.u16(checked_u16(mask.width, "mask width"));
  w.u16(checked_u16(mask.height, "mask height"));
  std::uint8_t current = 0;
  std::size_t i = 0;
  const std::size_t n = mask.bits.size();
  while (i < n) {
    std::size_t run = 0;
    while (i < n && (mask.bits[i] != 0) == (current != 0)) {
      ++run;
      ++i;
    }
    while (run > 0xFFFF) {
      w.u16(0xFFFF);
      w.u16(0);
      run -= 0xFFFF;
    }
    w.u16(static_cast<std::uint16_t>(run));
    current ^= 1;
  }
  return std::move(w.data());
}

MaskMessage decode_mask(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, kMaskMagic, "MSK0");
  MaskMessage m;
  m.seq = r.u32();
  const std::size_t width = r.u16();
  const std::size_t height = r.u16();
  m.mask = vision::BinaryMask(width, height);
  if (r.remaining() % 2 != 0) throw ProtocolError("MSK0: odd run-length payload");
  std::size_t pos = 0;
  std::uint8_t current = 0;
  while (r.remaining() > 0) {
    const std::size_t run = r.u16();
    if (run > m.mask.bits.size() - pos) throw ProtocolError("MSK0: runs exceed mask size");
    std::fill_n(m.mask.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, current);
    pos += run;
    current ^= 1;
  }
  if (pos != m.mask.bits.size()) throw ProtocolError("MSK0: runs do not cover the mask");
  return m;
}

std::vector<std::uint8_t> encode_pcm(std::span<const std::int16_t> samples, std::uint32_t seq) {
  Writer w(kPcmMagic);
  w.u32(seq);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  for (std::int16_t s : samples) w.u16(static_cast<std::uint16_t>(s));
  return std::move(w.data());
}

PcmMessage decode_pcm(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, kPcmMagic, "PCM0");
  PcmMessage m;
  m.seq = r.u32();
  const std::uint32_t n = r.u32();
  if (r.remaining() != 2 * static_cast<std::size_t>(n)) throw ProtocolError("PCM0: sample count mismatch");
  m.samples.resize(n);
  for (auto& s : m.samples) s = static_cast<std::int16_t>(r.u16());
  return m;
}

namespace {

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("field '") + key + "' has the wrong type");
  }
}

int int_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) throw ProtocolError(std::string("field '") + key + "' must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw ProtocolError(std::string("field '") + key + "' out of range");
  return static_cast<int>(v);
}

double number_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

mapping::MapRoute route_from_json(const json& j) {
  mapping::MapRoute r;
  try {
    r.source = mapping::parse_feature(field<std::string>(j, "source"));
    r.target = mapping::parse_target(field<std::string>(j, "target"));
    r.out_min = number_field(j, "out_min");
    r.out_max = number_field(j, "out_max");
    if (j.contains("curve")) r.curve = mapping::parse_curve(field<std::string>(j, "curve"));
    if (j.contains("smoothing_ms")) r.smoothing_ms = number_field(j, "smoothing_ms");
    if (j.contains("invert")) r.invert = field<bool>(j, "invert");
    r.validate();
  } catch (const ConfigError& e) {
    throw ProtocolError(e.what());
  }
  return r;
}

}  // namespace

ClientRequest parse_request(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed JSON");
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const std::string type = field<std::string>(j, "type");
  if (type == "init") return InitRequest{int_field(j, "x"), int_field(j, "y")};
  if (type == "thresholds") {
    ThresholdsRequest t;
    t.thresholds.red_min = int_field(j, "red_min");
    t.thresholds.intensity_max = int_field(j, "intensity_max");
    try {
      t.thresholds.validate();
    } catch (const ConfigError& e) {
      throw ProtocolError(e.what());
    }
    return t;
  }
  if (type == "route") return RouteRequest{route_from_json(j)};
  if (type == "calibrate") {
    const double s = number_field(j, "seconds");
    if (!std::isfinite(s) || s <= 0.0) throw ProtocolError("calibrate seconds must be positive");
    return CalibrateRequest{s};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

std::string format_request(const ClientRequest& request) {
  json j;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, InitRequest>) {
          j = {{"type", "init"}, {"x", r.x}, {"y", r.y}};
        } else if constexpr (std::is_same_v<T, ThresholdsRequest>) {
          j = {{"type", "thresholds"},
               {"red_min", r.thresholds.red_min},
               {"intensity_max", r.thresholds.intensity_max}};
        } else if constexpr (std::is_same_v<T, RouteRequest>) {
          j = {{"type", "route"},
               {"source", std::string(mapping::to_string(r.route.source))},
               {"target", mapping::to_string(r.route.target)},
               {"out_min", r.route.out_min},
               {"out_max", r.route.out_max},
               {"curve", std::string(mapping::to_string(r.route.curve))},
               {"smoothing_ms", r.route.smoothing_ms},
               {"invert", r.route.invert}};
        } else {
          j = {{"type", "calibrate"}, {"seconds", r.seconds}};
        }
      },
      request);
  return j.dump();
}

std::string features_message(const vision::FrameAnalysis& a, std::uint32_t seq) {
  const auto point = [](Point2 p) { return json::array({p.x, p.y}); };
  json j{{"type", "features"},
         {"seq", seq},
         {"A", a.features.area},
         {"H", a.features.height},
         {"W", a.features.width},
         {"R", a.features.aspect},
         {"n1", a.pair ? point(a.pair->n1()) : json::array({0.0, 0.0})},
         {"n2", a.pair ? point(a.pair->n2()) : json::array({0.0, 0.0})},
         {"angle", a.features.a_n},
         {"lost", a.lost}};
  return j.dump();
}

std::string ack_message(std::string_view msg) { return json{{"type", "ack"}, {"msg", msg}}.dump(); }

std::string error_message(std::string_view msg) { return json{{"type", "error"}, {"msg", msg}}.dump(); }

}  // namespace mouthsyrinx::engine
