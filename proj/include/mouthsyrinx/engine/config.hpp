#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mouthsyrinx/mapping/mapping.hpp"
#include "mouthsyrinx/syrinx/config.hpp"
#include "mouthsyrinx/vision/pipeline.hpp"

namespace mouthsyrinx::engine {

struct IoConfig {
  double fps = 30.0;
  double sample_rate = 44100.0;
  int port = 8765;
  std::size_t frame_queue = 4;   // frames waiting for the vision worker
  std::size_t audio_queue = 64;  // outgoing messages waiting for the network

  void validate() const;
  friend bool operator==(const IoConfig&, const IoConfig&) = default;
};

struct MappingConfig {
  std::vector<mapping::MapRoute> routes = default_routes();
  mapping::Calibration calibration;

  // aspect -> tension_left (exponential), area -> p_lung (linear),
  // width -> trachea_length_scale (linear, inverted).
  static std::vector<mapping::MapRoute> default_routes();
  friend bool operator==(const MappingConfig&, const MappingConfig&) = default;
};

struct EngineConfig {
  vision::VisionConfig vision;
  syrinx::SyrinxConfig syrinx;      // sample_rate is taken from io
  syrinx::SyrinxControls controls;  // fixed controls for synth, defaults for unrouted targets
  MappingConfig mapping;
  IoConfig io;

  // Throws ConfigError naming the offending section.
  void validate() const;
  // Syrinx config with the io sample rate applied.
  syrinx::SyrinxConfig synth_config() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Flat sectioned `key = value` text with [vision], [syrinx], [mapping] and
// [io]. Omitted keys keep their defaults; unknown keys, sections and
// malformed values throw ConfigError carrying the line number.
EngineConfig parse_config(std::string_view text);
EngineConfig load_config(const std::filesystem::path& path);
// Every field in canonical order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const EngineConfig& config);
void save_config(const std::filesystem::path& path, const EngineConfig& config);

// `aspect -> tension_left exponential 50 200 [invert] [smoothing_ms=30]`
mapping::MapRoute parse_route(std::string_view text);
std::string format_route(const mapping::MapRoute& route);

// Shortest text that reads back to the same double.
std::string format_number(double v);

}  // namespace mouthsyrinx::engine
