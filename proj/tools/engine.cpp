#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>

#include "mouthsyrinx/engine/config.hpp"
#include "mouthsyrinx/engine/control_log.hpp"
#include "mouthsyrinx/engine/frames.hpp"
#include "mouthsyrinx/engine/offline.hpp"
#include "mouthsyrinx/engine/server.hpp"
#include "mouthsyrinx/engine/wav.hpp"
#include "mouthsyrinx/syrinx/analysis.hpp"

using namespace mouthsyrinx;
using namespace mouthsyrinx::engine;

namespace {

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError("malformed " + what + " '" + std::string(s) + "'");
  return v;
}

Point2 parse_click(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--click expects X,Y");
  return {parse_double(std::string_view(text).substr(0, comma), "click x"),
          parse_double(std::string_view(text).substr(comma + 1), "click y")};
}

// a:b:n -> n evenly spaced values from a to b.
std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw ConfigError(what + " expects a:b:n");
  const std::string_view s(text);
  const double a = parse_double(s.substr(0, c1), what);
  const double b = parse_double(s.substr(c1 + 1, c2 - c1 - 1), what);
  const double n = parse_double(s.substr(c2 + 1), what);
  if (n < 1 || n != std::floor(n)) throw ConfigError(what + ": n must be a positive integer");
  return syrinx::linear_grid(a, b, static_cast<std::size_t>(n));
}

void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

int cmd_run(const std::string& frames_dir, const std::string& config_path, const std::string& out_wav,
            const std::string& out_controls, const std::string& click, std::optional<double> fps,
            const std::string& out_midi) {
  EngineConfig config = load_config(config_path);
  if (fps) {
    config.io.fps = *fps;
    config.validate();
  }
  const auto frames = load_frames(frames_dir, config.io.fps);
  const auto result =
      run_offline(config, frames, click.empty() ? std::nullopt : std::optional<Point2>(parse_click(click)));
  write_wav(result.samples, static_cast<std::uint32_t>(config.io.sample_rate), out_wav);
  write_control_log(out_controls, result.rows);
  if (!out_midi.empty()) write_bytes(out_midi, encode_midi_stream(result.rows));
  std::cerr << frames.size() << " frames, " << result.samples.size() << " samples, " << result.lost_frames
            << " lost, " << result.blowups << " blowups\n";
  return 0;
}

int cmd_synth(const std::string& config_path, double duration, const std::string& out_wav) {
  const EngineConfig config = load_config(config_path);
  if (!(duration > 0.0)) throw ConfigError("--duration must be positive");
  syrinx::Syrinx synth(config.synth_config(), silent_controls(config.controls));
  const auto n = static_cast<std::size_t>(std::llround(duration * config.io.sample_rate));
  const auto samples = synth.process_block(config.controls, n);
  write_wav(samples, static_cast<std::uint32_t>(config.io.sample_rate), out_wav);
  std::cerr << n << " samples, " << synth.blowup_count() << " blowups\n";
  return 0;
}

int cmd_scan(const std::string& config_path, const std::string& pressures, const std::string& tensions,
             const std::string& out_csv) {
  const EngineConfig config = load_config(config_path);
  const auto p = parse_grid(pressures, "--pressures");
  const auto t = parse_grid(tensions, "--tensions");
  const auto cells = syrinx::stability_scan(config.synth_config(), p, t, config.controls);
  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw IoError("cannot write " + out_csv);
  out << "pressure,tension,regime,f0,rms,blew_up\n";
  for (const auto& c : cells) {
    out << format_number(c.pressure) << ',' << format_number(c.tension) << ',' << syrinx::to_string(c.regime)
        << ',' << format_number(c.f0) << ',' << format_number(c.rms) << ',' << (c.blew_up ? 1 : 0) << '\n';
  }
  return 0;
}


int cmd_serve(const std::string& config_path, std::optional<int> port, const std::string& host) {
  EngineConfig config = config_path.empty() ? EngineConfig{} : load_config(config_path);
  if (port) config.io.port = *port;
  config.validate();
  Server server(config, host, static_cast<std::uint16_t>(config.io.port));
  std::cerr << "listening on ws://" << host << ":" << server.port() << "\n";
  server.run();
  return 0;
}

int cmd_calibrate(const std::string& frames_dir, const std::string& config_path, const std::string& out,
                  const std::string& click, double seconds) {
  EngineConfig config = load_config(config_path);
  const auto frames = load_frames(frames_dir, config.io.fps);
  ControlChain chain(config);
  std::vector<mapping::TimedFeatures> captured;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const ChainStep step = i == 0 ? chain.initialize(frames[0], click.empty() ? std::nullopt
                                                                              : std::optional(parse_click(click)))
                                  : chain.process(frames[i]);
    if (!step.lost) captured.push_back({frames[i].timestamp, step.analysis.features});
  }
  const double window = seconds > 0.0 ? seconds : frames.back().timestamp - frames.front().timestamp;
  config.mapping.calibration = mapping::calibrate_capture(captured, window);
  save_config(out, config);
  std::cerr << "calibrated from " << captured.size() << " frames\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mouth-controlled syrinx engine"};
  app.require_subcommand(1);

  std::string frames, config, out_wav, out_controls, click, out_midi, out_csv, pressures, tensions, out, host;
  std::optional<double> fps;
  std::optional<int> port;
  double duration = 0.0, seconds = 0.0;

  auto* run = app.add_subcommand("run", "Render a frame sequence to WAV and a control log");
  run->add_option("--frames", frames, "Directory of PPM/PNG frames, or raw RGB file")->required();
  run->add_option("--config", config, "Engine config file")->required();
  run->add_option("--out-wav", out_wav)->required();
  run->add_option("--out-controls", out_controls, "Control log CSV")->required();
  run->add_option("--click", click, "Init click X,Y in frame 0");
  run->add_option("--fps", fps, "Frame rate (overrides the config)");
  run->add_option("--out-midi", out_midi, "Raw MIDI control-change byte stream");

  auto* synth = app.add_subcommand("synth", "Render the syrinx alone with the config's fixed controls");
  synth->add_option("--config", config)->required();
  synth->add_option("--duration", duration, "Seconds")->required();
  synth->add_option("--out-wav", out_wav)->required();

  auto* scan = app.add_subcommand("scan", "Classify the oscillation regime over a pressure x tension grid");
  scan->add_option("--config", config)->required();
  scan->add_option("--pressures", pressures, "a:b:n in Pa")->required();
  scan->add_option("--tensions", tensions, "a:b:n in N/m")->required();
  scan->add_option("--out-csv", out_csv)->required();

  auto* serve = app.add_subcommand("serve", "WebSocket service for the control panel");
  serve->add_option("--config", config);
  serve->add_option("--port", port);
  serve->add_option("--host", host, "Listen address")->default_val("127.0.0.1");

  auto* calibrate = app.add_subcommand("calibrate", "Capture feature ranges from a frame sequence");
  calibrate->add_option("--frames", frames)->required();
  calibrate->add_option("--config", config)->required();
  calibrate->add_option("--out", out, "Config file with the captured calibration")->required();
  calibrate->add_option("--click", click, "Init click X,Y in frame 0");
  calibrate->add_option("--seconds", seconds, "Capture window (default: whole sequence)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(frames, config, out_wav, out_controls, click, fps, out_midi);
    if (*synth) return cmd_synth(config, duration, out_wav);
    if (*scan) return cmd_scan(config, pressures, tensions, out_csv);
    if (*serve) return cmd_serve(config, port, host);
    if (*calibrate) return cmd_calibrate(frames, config, out, click, seconds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
