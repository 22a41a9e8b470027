#include "mouthsyrinx/engine/control_log.hpp"

#include <fstream>
#include <map>

#include "mouthsyrinx/engine/config.hpp"

namespace mouthsyrinx::engine {

ControlLogRow make_row(const vision::MouthFeatures& features, const mapping::ControlFrame& control, bool lost) {
  ControlLogRow row;
  row.frame_seq = control.seq;
  row.time_s = control.time_s;
  row.features = features;
  row.controls = control.syrinx;
  row.midi = control.midi;
  row.lost = lost;
  return row;
}

std::string control_log_header() {
  return "frame_seq,time_s,A,H,W,R,cx,cy,a_n,p_lung,tension_left,tension_right,"
         "trachea_length_scale,trachea_radius_scale,midi,lost";
}

std::string format_row(const ControlLogRow& r) {
  std::string s = std::to_string(r.frame_seq);
  for (double v : {r.time_s, r.features.area, r.features.height, r.features.width, r.features.aspect,
                   r.features.c_n.x, r.features.c_n.y, r.features.a_n, r.controls.p_lung, r.controls.tension_left,
                   r.controls.tension_right, r.controls.trachea_length_scale, r.controls.trachea_radius_scale}) {
    s += ',';
    s += format_number(v);
  }
  s += ',';
  for (std::size_t i = 0; i < r.midi.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(r.midi[i].first) + ":" + std::to_string(r.midi[i].second);
  }
  s += r.lost ? ",1" : ",0";
  return s;
}

std::string format_control_log(std::span<const ControlLogRow> rows) {
  std::string out = control_log_header() + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

void write_control_log(const std::filesystem::path& path, std::span<const ControlLogRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_control_log(rows);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::uint8_t> encode_midi_stream(std::span<const ControlLogRow> rows, int channel) {
  std::vector<std::uint8_t> out;
  std::map<int, int> last;
  const auto status = static_cast<std::uint8_t>(0xB0 | (channel & 0x0F));
  for (const auto& row : rows) {
    for (const auto& [cc, value] : row.midi) {
      const auto it = last.find(cc);
      if (it != last.end() && it->second == value) continue;
      last[cc] = value;
      out.push_back(status);
      out.push_back(static_cast<std::uint8_t>(cc & 0x7F));
      out.push_back(static_cast<std::uint8_t>(value & 0x7F));
    }
  }
  return out;
}

}  // namespace mouthsyrinx::engine
