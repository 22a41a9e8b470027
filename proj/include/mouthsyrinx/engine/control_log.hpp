#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mouthsyrinx/mapping/mapping.hpp"
#include "mouthsyrinx/vision/mouth.hpp"

namespace mouthsyrinx::engine {

struct ControlLogRow {
  std::uint64_t frame_seq = 0;
  double time_s = 0.0;
  vision::MouthFeatures features;
  syrinx::SyrinxControls controls;
  std::vector<std::pair<int, int>> midi;
  bool lost = false;
};

ControlLogRow make_row(const vision::MouthFeatures& features, const mapping::ControlFrame& control,
                       bool lost);

// Header: frame_seq,time_s,A,H,W,R,cx,cy,a_n,p_lung,tension_left,tension_right,
// trachea_length_scale,trachea_radius_scale,midi,lost. midi is "cc:value"
// pairs joined by ';'.
std::string control_log_header();
std::string format_row(const ControlLogRow& row);
std::string format_control_log(std::span<const ControlLogRow> rows);
void write_control_log(const std::filesystem::path& path, std::span<const ControlLogRow> rows);

// Raw MIDI control-change bytes (status 0xB0 | channel) for every value that
// differs from the previous row's value on the same controller.
std::vector<std::uint8_t> encode_midi_stream(std::span<const ControlLogRow> rows, int channel = 0);

}  // namespace mouthsyrinx::engine
